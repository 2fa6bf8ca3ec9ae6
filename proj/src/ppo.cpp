#include "txadapt/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "txadapt/errors.hpp"

namespace txadapt {

namespace {

double critic_value(const Mlp& critic, const Eigen::Vector2d& obs) {
    return critic.forward(obs)(0);
}

Eigen::MatrixXd gather_obs(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd m(2, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = buffer.items[idx[c]].obs;
    return m;
}

struct ActorBatchGrad {
    Eigen::MatrixXd d_out;   // dLoss/d(actor outputs), one column per sample
    double loss = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
};

// Clipped-surrogate loss gradient wrt actor outputs for one minibatch.
ActorBatchGrad actor_output_grad(const PolicyNet& net, const Eigen::MatrixXd& actor_out,
                                 const ReplayBuffer& buffer, const std::vector<std::size_t>& idx,
                                 const std::vector<double>& advantage, double clip,
                                 double entropy_coef) {
    const auto b = static_cast<Eigen::Index>(idx.size());
    const double inv_b = 1.0 / static_cast<double>(b);
    ActorBatchGrad out;
    out.d_out = Eigen::MatrixXd::Zero(actor_out.rows(), b);
    for (Eigen::Index c = 0; c < b; ++c) {
        const Transition& tr = buffer.items[idx[static_cast<std::size_t>(c)]];
        const double adv = advantage[idx[static_cast<std::size_t>(c)]];
        if (net.head == HeadKind::categorical) {
            Eigen::VectorXd logits = actor_out.col(c);
            Eigen::VectorXd probs = softmax(logits);
            double new_lp = categorical_log_prob(logits, tr.action);
            double ratio = std::exp(new_lp - tr.log_prob);
            bool clipped = (adv >= 0.0 && ratio > 1.0 + clip) || (adv < 0.0 && ratio < 1.0 - clip);
            double surr = std::min(ratio * adv,
                                   std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv);
            out.loss -= surr * inv_b;
            out.approx_kl += (tr.log_prob - new_lp) * inv_b;
            double h = 0.0;
            for (Eigen::Index k = 0; k < probs.size(); ++k)
                if (probs(k) > 0.0) h -= probs(k) * std::log(probs(k));
            out.entropy += h * inv_b;
            out.loss -= entropy_coef * h * inv_b;
            if (!clipped) {
                double coef = ratio * adv * inv_b;
                out.d_out.col(c) = -coef * (-probs);
                out.d_out(tr.action, c) -= coef;
            }
            // d(-entropy_coef * H)/dlogits = entropy_coef * p .* (log p + H)
            for (Eigen::Index k = 0; k < probs.size(); ++k) {
                if (probs(k) > 0.0)
                    out.d_out(k, c) += entropy_coef * inv_b * probs(k) * (std::log(probs(k)) + h);
            }
        } else {
            Eigen::VectorXd raw = actor_out.col(c);
            double new_lp = beta_policy_log_prob(raw, tr.unit_action);
            double ratio = std::exp(new_lp - tr.log_prob);
            bool clipped = (adv >= 0.0 && ratio > 1.0 + clip) || (adv < 0.0 && ratio < 1.0 - clip);
            double surr = std::min(ratio * adv,
                                   std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv);
            out.loss -= surr * inv_b;
            out.approx_kl += (tr.log_prob - new_lp) * inv_b;
            if (!clipped) {
                double coef = ratio * adv * inv_b;
                for (Eigen::Index d = 0; d < tr.unit_action.size(); ++d) {
                    BetaShape s = beta_shape_from_raw(raw(2 * d), raw(2 * d + 1));
                    double da = 0.0, db = 0.0;
                    beta_log_pdf_grad_raw(tr.unit_action(d), s, raw(2 * d), raw(2 * d + 1), da, db);
                    out.d_out(2 * d, c) = -coef * da;
                    out.d_out(2 * d + 1, c) = -coef * db;
                }
            }
        }
    }
    return out;
}

}  // namespace

AdvantageResult advantage_estimates(const ReplayBuffer& buffer, const PolicyNet& net,
                                    const TrainConfig& config) {
    const std::size_t n = buffer.size();
    if (n == 0) throw ConfigError("advantage estimation over an empty buffer");
    AdvantageResult res;
    res.raw.assign(n, 0.0);
    res.normalized.assign(n, 0.0);
    res.returns.assign(n, 0.0);

    double next_value = 0.0;
    if (!buffer.items.back().done)
        next_value = critic_value(net.critic, buffer.items.back().next_obs);

    double running = 0.0;
    for (std::size_t t = n; t-- > 0;) {
        const Transition& tr = buffer.items[t];
        double v_next;
        if (tr.done) {
            v_next = 0.0;
        } else if (t + 1 < n) {
            v_next = buffer.items[t + 1].value;
        } else {
            v_next = next_value;
        }
        double delta = tr.reward + config.discount * v_next - tr.value;
        running = tr.done ? delta
                          : delta + config.discount * config.gae_lambda * running;
        res.raw[t] = running;
        res.returns[t] = running + tr.value;
    }

    double mean = std::accumulate(res.raw.begin(), res.raw.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : res.raw) var += (a - mean) * (a - mean);
    var /= static_cast<double>(n);
    double sdev = std::sqrt(var);
    for (std::size_t t = 0; t < n; ++t) res.normalized[t] = (res.raw[t] - mean) / (sdev + 1e-8);
    return res;
}

UpdateStats ppo_update(PolicyNet& net, Adam& actor_opt, Adam& critic_opt,
                       const ReplayBuffer& buffer, const TrainConfig& config, Rng& rng) {
    UpdateStats stats;
    const std::size_t n = buffer.size();
    if (n == 0) throw ConfigError("PPO update over an empty buffer");

    std::vector<double> actor_snapshot, critic_snapshot;
    net.actor.flatten(actor_snapshot);
    net.critic.flatten(critic_snapshot);

    AdvantageResult adv = advantage_estimates(buffer, net, config);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const int mb = std::max(1, std::min<int>(config.minibatch, static_cast<int>(n)));

    Mlp::Grad actor_grad = net.actor.make_grad();
    Mlp::Grad critic_grad = net.critic.make_grad();
    bool failed = false;

    for (int epoch = 0; epoch < config.epochs && !failed; ++epoch) {
        rng.shuffle(order);
        double ep_actor_loss = 0.0, ep_critic_loss = 0.0, ep_entropy = 0.0, ep_kl = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < n && !failed; start += static_cast<std::size_t>(mb)) {
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(
                                                             std::min(n, start + static_cast<std::size_t>(mb))));
            Eigen::MatrixXd obs = gather_obs(buffer, idx);

            Mlp::BatchCache actor_cache, critic_cache;
            Eigen::MatrixXd actor_out = net.actor.forward_batch(obs, &actor_cache);
            Eigen::MatrixXd critic_out = net.critic.forward_batch(obs, &critic_cache);

            ActorBatchGrad ag = actor_output_grad(net, actor_out, buffer, idx, adv.normalized,
                                                  config.clip_ratio, config.entropy_coef);

            const auto b = static_cast<Eigen::Index>(idx.size());
            const double inv_b = 1.0 / static_cast<double>(b);
            Eigen::MatrixXd d_critic(1, b);
            double closs = 0.0;
            for (Eigen::Index c = 0; c < b; ++c) {
                double err = critic_out(0, c) - adv.returns[idx[static_cast<std::size_t>(c)]];
                closs += err * err * inv_b;
                d_critic(0, c) = 2.0 * err * inv_b;
            }

            actor_grad.zero();
            critic_grad.zero();
            net.actor.backward_batch(actor_cache, ag.d_out, actor_grad);
            net.critic.backward_batch(critic_cache, d_critic, critic_grad);

            if (!std::isfinite(ag.loss) || !std::isfinite(closs) || !actor_grad.finite() ||
                !critic_grad.finite()) {
                failed = true;
                break;
            }
            actor_opt.step(net.actor, actor_grad);
            critic_opt.step(net.critic, critic_grad);

            ep_actor_loss += ag.loss;
            ep_critic_loss += closs;
            ep_entropy += ag.entropy;
            ep_kl += ag.approx_kl;
            ++batches;
        }
        if (!failed && batches > 0 && epoch == config.epochs - 1) {
            stats.actor_loss = ep_actor_loss / batches;
            stats.critic_loss = ep_critic_loss / batches;
            stats.entropy = ep_entropy / batches;
            stats.approx_kl = ep_kl / batches;
        }
    }

    if (failed) {
        net.actor.unflatten(actor_snapshot);
        net.critic.unflatten(critic_snapshot);
        stats.aborted = true;
    }
    return stats;
}

ObjectiveGrads objective_gradients(const PolicyNet& net, const ReplayBuffer& buffer,
                                   const TrainConfig& config) {
    ObjectiveGrads out;
    out.actor = net.actor.make_grad();
    out.critic = net.critic.make_grad();
    const std::size_t n = buffer.size();
    if (n == 0) throw ConfigError("gradient of an empty buffer");

    AdvantageResult adv = advantage_estimates(buffer, net, config);

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Eigen::MatrixXd obs = gather_obs(buffer, idx);

    Mlp::BatchCache actor_cache, critic_cache;
    Eigen::MatrixXd actor_out = net.actor.forward_batch(obs, &actor_cache);
    Eigen::MatrixXd critic_out = net.critic.forward_batch(obs, &critic_cache);

    const double inv_n = 1.0 / static_cast<double>(n);
    Eigen::MatrixXd d_actor = Eigen::MatrixXd::Zero(actor_out.rows(), actor_out.cols());
    Eigen::MatrixXd d_critic(1, actor_out.cols());
    for (std::size_t t = 0; t < n; ++t) {
        const Transition& tr = buffer.items[t];
        const auto c = static_cast<Eigen::Index>(t);
        const double coef = adv.normalized[t] * inv_n;  // ascent on advantage
        if (net.head == HeadKind::categorical) {
            Eigen::VectorXd probs = softmax(actor_out.col(c));
            d_actor.col(c) = -coef * probs;
            d_actor(tr.action, c) += coef;
        } else {
            for (Eigen::Index d = 0; d < tr.unit_action.size(); ++d) {
                BetaShape s = beta_shape_from_raw(actor_out(2 * d, c), actor_out(2 * d + 1, c));
                double da = 0.0, db = 0.0;
                beta_log_pdf_grad_raw(tr.unit_action(d), s, actor_out(2 * d, c),
                                      actor_out(2 * d + 1, c), da, db);
                d_actor(2 * d, c) = coef * da;
                d_actor(2 * d + 1, c) = coef * db;
            }
        }
        // descent on squared value error
        d_critic(0, c) = -2.0 * (critic_out(0, c) - adv.returns[t]) * inv_n;
    }
    net.actor.backward_batch(actor_cache, d_actor, out.actor);
    net.critic.backward_batch(critic_cache, d_critic, out.critic);
    out.finite = out.actor.finite() && out.critic.finite();
    return out;
}

SampledAction sample_action(const PolicyNet& net, const ActionSpec& spec,
                            const Observation& obs, Rng& rng) {
    SampledAction out;
    Eigen::Vector2d x(obs.queue_norm, obs.arrival_norm);
    out.partial.obs = x;
    Eigen::VectorXd actor_out = net.actor.forward(x);
    out.partial.value = net.critic.forward(x)(0);
    if (net.head == HeadKind::categorical) {
        CategoricalSample s = sample_categorical(actor_out, rng);
        out.partial.action = s.action;
        out.partial.log_prob = s.log_prob;
        out.effective = spec.discrete.resolve(s.action);
    } else {
        BetaSampleResult s = sample_beta_policy(actor_out, rng);
        out.partial.unit_action = s.unit;
        out.partial.log_prob = s.log_prob;
        out.effective = spec.continuous.resolve(s.unit(0), s.unit(1));
    }
    return out;
}

TrainResult train_policy(PolicyNet& net, Env& env, const ActionSpec& spec,
                         const TrainConfig& config, int episodes, std::uint64_t seed) {
    TrainResult result;
    Rng action_rng(derive_seed(seed, "train-actions"));
    Rng update_rng(derive_seed(seed, "train-updates"));
    Adam actor_opt(net.actor, config.learning_rate);
    Adam critic_opt(net.critic, config.learning_rate);
    ReplayBuffer buffer;
    buffer.items.reserve(static_cast<std::size_t>(config.update_period));

    for (int ep = 0; ep < episodes; ++ep) {
        Observation obs = env.reset();
        EpisodeStats stats;
        double power_sum = 0.0;
        const int t_slots = env.episode_slots();
        for (int t = 0; t < t_slots; ++t) {
            SampledAction act = sample_action(net, spec, obs, action_rng);
            StepResult sr = env.step(act.effective);
            act.partial.reward = sr.reward;
            act.partial.done = sr.done;
            act.partial.next_obs = Eigen::Vector2d(sr.next.queue_norm, sr.next.arrival_norm);
            buffer.items.push_back(std::move(act.partial));
            stats.total_reward += sr.reward;
            power_sum += sr.power_w;
            obs = sr.next;
            if (buffer.size() >= static_cast<std::size_t>(config.update_period)) {
                UpdateStats us = ppo_update(net, actor_opt, critic_opt, buffer, config, update_rng);
                ++result.updates;
                if (us.aborted) ++result.aborted_updates;
                buffer.clear();
            }
        }
        stats.avg_power_w = power_sum / t_slots;
        stats.dvp = env.episode_dvp();
        stats.violations = env.episode_violations();
        result.curve.push_back(stats);
    }
    return result;
}

EvalResult evaluate_policy(const PolicyNet& net, Env& env, const ActionSpec& spec,
                           std::int64_t slots, std::uint64_t seed,
                           const std::vector<double>* level_power_scale) {
    EvalResult res;
    Rng rng(derive_seed(seed, "eval-actions"));
    Observation obs = env.reset();
    double power_sum = 0.0;
    for (std::int64_t t = 0; t < slots; ++t) {
        SampledAction act = sample_action(net, spec, obs, rng);
        if (level_power_scale) {
            if (act.effective.level_index < 0)
                throw ConfigError("power scaling needs a discrete outage level");
            act.effective.power_w *=
                (*level_power_scale)[static_cast<std::size_t>(act.effective.level_index)];
        }
        StepResult sr = env.step(act.effective);
        power_sum += act.effective.power_w;
        obs = sr.next;
    }
    res.slots = slots;
    res.avg_power_w = power_sum / static_cast<double>(slots);
    res.violations = env.episode_violations();
    res.dvp = env.episode_dvp();
    return res;
}

}  // namespace txadapt
