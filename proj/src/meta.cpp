#include "txadapt/meta.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "txadapt/errors.hpp"
#include "txadapt/parallel.hpp"
#include "txadapt/quantile.hpp"

namespace txadapt {

std::vector<MetaTask> build_task_set(const LocationDataset& dataset, const EnvConfig& env_template,
                                     const std::vector<double>& levels, int count,
                                     std::uint64_t seed) {
    const std::size_t m = dataset.locations.size();
    if (count < 1 || static_cast<std::size_t>(count) > m)
        throw ConfigError("task count must lie in [1, known locations]");
    if (dataset.mean_gain.size() != m)
        throw ConfigError("dataset lacks mean gain metadata");

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dataset.mean_gain[a] != dataset.mean_gain[b])
            return dataset.mean_gain[a] < dataset.mean_gain[b];
        return a < b;
    });

    Rng rng(derive_seed(seed, "task-set"));
    std::vector<MetaTask> tasks;
    tasks.reserve(static_cast<std::size_t>(count));
    for (int bin = 0; bin < count; ++bin) {
        std::size_t lo = m * static_cast<std::size_t>(bin) / static_cast<std::size_t>(count);
        std::size_t hi = m * (static_cast<std::size_t>(bin) + 1) / static_cast<std::size_t>(count);
        std::size_t pick = lo + static_cast<std::size_t>(rng.uniform_index(hi - lo));
        std::size_t d = order[pick];

        MetaTask task;
        task.dataset_index = d;
        task.env = env_template;
        task.env.p_max_w = peak_power(env_template.lambda_bits, env_template.channel_uses,
                                      env_template.dvp_target, env_template.d_max,
                                      dataset.mean_gain[d]);
        double q_max = estimate_quantile(dataset.samples[d], levels.back());
        task.space.p_max_w = task.env.p_max_w;
        task.space.rate_cap = epsilon_outage_rate(task.env.p_max_w, q_max);
        task.pool = dataset.samples[d];
        tasks.push_back(std::move(task));
    }
    return tasks;
}

namespace {

struct TaskEpisodeOutput {
    ObjectiveGrads grads;
    double fresh_reward = 0.0;
};

// Inner adaptation + fresh-trajectory gradient for one task in one episode.
TaskEpisodeOutput run_task_episode(const PolicyNet& shared, const MetaTask& task, Env& env,
                                   const TrainConfig& inner, std::uint64_t episode_seed) {
    PolicyNet clone = shared;  // deep copy; the shared parameters stay untouched
    Adam actor_opt(clone.actor, inner.learning_rate);
    Adam critic_opt(clone.critic, inner.learning_rate);
    Rng action_rng(derive_seed(episode_seed, "inner-actions"));
    Rng update_rng(derive_seed(episode_seed, "inner-updates"));
    ActionSpec spec;
    spec.continuous = task.space;

    ReplayBuffer buffer;
    Observation obs = env.reset();
    const int t_slots = env.episode_slots();
    for (int t = 0; t < t_slots; ++t) {
        SampledAction act = sample_action(clone, spec, obs, action_rng);
        StepResult sr = env.step(act.effective);
        act.partial.reward = sr.reward;
        act.partial.done = sr.done;
        act.partial.next_obs = Eigen::Vector2d(sr.next.queue_norm, sr.next.arrival_norm);
        buffer.items.push_back(std::move(act.partial));
        obs = sr.next;
        if (buffer.size() >= static_cast<std::size_t>(inner.update_period)) {
            ppo_update(clone, actor_opt, critic_opt, buffer, inner, update_rng);
            buffer.clear();
        }
    }

    // Fresh on-policy data under the adapted parameters; no further updates.
    buffer.clear();
    TaskEpisodeOutput out;
    obs = env.reset();
    for (int t = 0; t < t_slots; ++t) {
        SampledAction act = sample_action(clone, spec, obs, action_rng);
        StepResult sr = env.step(act.effective);
        act.partial.reward = sr.reward;
        act.partial.done = sr.done;
        act.partial.next_obs = Eigen::Vector2d(sr.next.queue_norm, sr.next.arrival_norm);
        buffer.items.push_back(std::move(act.partial));
        out.fresh_reward += sr.reward;
        obs = sr.next;
    }
    out.grads = objective_gradients(clone, buffer, inner);
    return out;
}

}  // namespace

MetaResult meta_train(const std::vector<MetaTask>& tasks, const MetaConfig& config,
                      std::uint64_t seed) {
    if (tasks.empty()) throw ConfigError("meta-training needs at least one task");
    MetaResult result;
    Rng init_rng(derive_seed(seed, "meta-init"));
    result.net = PolicyNet::make_beta(2, 2, init_rng);

    // Persistent per-task environments; streams keyed by the task's location
    // so results do not depend on task ordering.
    std::vector<Env> envs;
    envs.reserve(tasks.size());
    for (const auto& task : tasks) {
        ChannelSource channel;
        channel.pool = task.pool;
        envs.emplace_back(task.env, std::move(channel),
                          derive_seed(seed, "task-env", task.dataset_index));
    }

    std::vector<TaskEpisodeOutput> outputs(tasks.size());
    for (int ep = 0; ep < config.episodes; ++ep) {
        parallel_for(tasks.size(), config.threads, [&](std::size_t i) {
            std::uint64_t ep_seed = derive_seed(
                derive_seed(seed, "episode", static_cast<std::uint64_t>(ep)), "task",
                tasks[i].dataset_index);
            outputs[i] = run_task_episode(result.net, tasks[i], envs[i], config.inner, ep_seed);
        });

        // Aggregate in dataset-index order so task order never matters.
        std::vector<std::size_t> order(tasks.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return tasks[a].dataset_index < tasks[b].dataset_index;
        });
        bool all_finite = true;
        for (const auto& o : outputs) all_finite = all_finite && o.grads.finite;
        double mean_reward = 0.0;
        for (const auto& o : outputs) mean_reward += o.fresh_reward;
        mean_reward /= static_cast<double>(tasks.size());
        result.outer_reward_curve.push_back(mean_reward);

        if (!all_finite) {
            ++result.skipped_outer;
            continue;
        }
        for (std::size_t i : order) {
            for (std::size_t layer = 0; layer < result.net.actor.layers().size(); ++layer) {
                result.net.actor.layers()[layer].w +=
                    config.outer_lr * outputs[i].grads.actor.layers[layer].w;
                result.net.actor.layers()[layer].b +=
                    config.outer_lr * outputs[i].grads.actor.layers[layer].b;
            }
            const double critic_step = config.outer_lr * config.value_coef;
            for (std::size_t layer = 0; layer < result.net.critic.layers().size(); ++layer) {
                result.net.critic.layers()[layer].w +=
                    critic_step * outputs[i].grads.critic.layers[layer].w;
                result.net.critic.layers()[layer].b +=
                    critic_step * outputs[i].grads.critic.layers[layer].b;
            }
        }
    }
    return result;
}

AdaptResult adapt(const PolicyNet& init, Env& env, const ContinuousActionSpace& space,
                  const AdaptConfig& config, std::uint64_t seed) {
    AdaptResult result;
    result.net = init;
    if (config.steps == 0) return result;
    Adam actor_opt(result.net.actor, config.inner.learning_rate);
    Adam critic_opt(result.net.critic, config.inner.learning_rate);
    Rng action_rng(derive_seed(seed, "adapt-actions"));
    Rng update_rng(derive_seed(seed, "adapt-updates"));
    ActionSpec spec;
    spec.continuous = space;

    for (int step = 0; step < config.steps; ++step) {
        ReplayBuffer buffer;
        Observation obs = env.reset();
        EpisodeStats stats;
        double power_sum = 0.0;
        const int t_slots = env.episode_slots();
        for (int t = 0; t < t_slots; ++t) {
            SampledAction act = sample_action(result.net, spec, obs, action_rng);
            StepResult sr = env.step(act.effective);
            act.partial.reward = sr.reward;
            act.partial.done = sr.done;
            act.partial.next_obs = Eigen::Vector2d(sr.next.queue_norm, sr.next.arrival_norm);
            buffer.items.push_back(std::move(act.partial));
            stats.total_reward += sr.reward;
            power_sum += sr.power_w;
            obs = sr.next;
        }
        stats.avg_power_w = power_sum / t_slots;
        stats.dvp = env.episode_dvp();
        stats.violations = env.episode_violations();
        result.curve.push_back(stats);
        ppo_update(result.net, actor_opt, critic_opt, buffer, config.inner, update_rng);
    }
    return result;
}

}  // namespace txadapt
