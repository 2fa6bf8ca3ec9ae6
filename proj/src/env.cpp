#include "txadapt/env.hpp"

#include <algorithm>
#include <cmath>

#include "txadapt/errors.hpp"

namespace txadapt {

double peak_power(double lambda_bits, int channel_uses, double dvp_target, int d_max,
                  double mean_gain) {
    if (!(lambda_bits > 0.0) || channel_uses < 1 || d_max < 1)
        throw ConfigError("invalid arrival rate, blocklength, or delay bound");
    if (!(dvp_target > 0.0) || !(dvp_target < 1.0))
        throw ConfigError("DVP target must lie in (0, 1)");
    if (!(mean_gain > 0.0)) throw ConfigError("mean gain must be positive");
    double split = std::pow(dvp_target, 1.0 / d_max) / d_max;
    if (split >= 1.0)
        throw ConfigError("peak power undefined: per-slot outage split reaches 1");
    double numerator = std::pow(2.0, lambda_bits / channel_uses) - 1.0;
    double denominator = mean_gain * std::log(1.0 - split);
    return -numerator / denominator;
}

double epsilon_outage_rate(double power_w, double gain_quantile) {
    if (power_w < 0.0 || gain_quantile < 0.0)
        throw ConfigError("power and gain quantile must be non-negative");
    return std::log2(1.0 + power_w * gain_quantile);
}

double violation_penalty(std::int64_t violations, double budget, double delta, int nu) {
    if (budget <= 0.0) return delta;
    double d = static_cast<double>(violations);
    if (d > budget) return delta;
    return delta * std::pow(d / budget, nu);
}

double ChannelSource::draw(Rng& rng) const {
    if (quantile_fn) return quantile_fn(rng.uniform01());
    if (pool.empty()) throw ConfigError("channel source has neither pool nor quantile function");
    return pool[static_cast<std::size_t>(rng.uniform_index(pool.size()))];
}

Env::Env(const EnvConfig& config, ChannelSource channel, std::uint64_t seed)
    : config_(config),
      channel_(std::move(channel)),
      queue_(config.d_max),
      arrival_rng_(derive_seed(seed, "arrivals")),
      channel_rng_(derive_seed(seed, "channel")) {
    if (!(config.p_max_w > 0.0)) throw ConfigError("peak power must be set and positive");
    if (!(config.dvp_target > 0.0) || !(config.dvp_target < 1.0))
        throw ConfigError("DVP target must lie in (0, 1)");
    if (!(config.budget_frac > 0.0) || config.budget_frac > 1.0)
        throw ConfigError("budget fraction must lie in (0, 1]");
    if (config.nu < 1) throw ConfigError("penalty exponent must be >= 1");
    episode_slots_ = config.episode_slots > 0
                         ? config.episode_slots
                         : static_cast<int>(std::ceil(10.0 / config.dvp_target));
    budget_ = static_cast<double>(episode_slots_) * config.dvp_target * config.budget_frac;
    delta_ = config.delta >= 0.0 ? config.delta : 10.0 * config.p_max_w;
}

Observation Env::reset() {
    queue_.reset();
    slot_in_episode_ = 0;
    pending_arrival_ = draw_arrival(arrival_rng_, config_.lambda_bits);
    started_ = true;
    return observation();
}

Observation Env::observation() const {
    Observation obs;
    obs.queue_norm = static_cast<double>(queue_.backlog()) /
                     (static_cast<double>(config_.d_max) * config_.lambda_bits);
    obs.arrival_norm = static_cast<double>(pending_arrival_) / config_.lambda_bits;
    return obs;
}

StepResult Env::step(const EffectiveAction& action) {
    return step_with_gain(action, channel_.draw(channel_rng_));
}

StepResult Env::step_with_gain(const EffectiveAction& action, double gain) {
    if (!started_) throw ConfigError("environment used before reset");
    if (!(action.power_w > 0.0) || !(action.rate > 0.0))
        throw ConfigError("actions must have positive power and rate");
    StepResult res;
    res.power_w = action.power_w;
    res.rate = action.rate;
    res.arrival_bits = pending_arrival_;

    res.outage = std::log2(1.0 + action.power_w * gain) < action.rate;
    std::int64_t served =
        res.outage ? 0
                   : static_cast<std::int64_t>(std::floor(static_cast<double>(config_.channel_uses) *
                                                          action.rate));
    auto outcome = queue_.step(pending_arrival_, served);
    res.served_bits = outcome.served_bits;
    res.violation = outcome.violation;
    res.queue_after = outcome.queue_after;

    res.reward = -action.power_w;
    if (outcome.violation)
        res.reward -= violation_penalty(queue_.violations(), budget_, delta_, config_.nu);

    ++slot_in_episode_;
    res.done = slot_in_episode_ >= episode_slots_;
    pending_arrival_ = draw_arrival(arrival_rng_, config_.lambda_bits);
    res.next = observation();
    return res;
}

EffectiveAction DiscreteActionSpace::resolve(int action_index) const {
    const int h = static_cast<int>(powers_w.size());
    if (action_index < 0 || action_index >= count())
        throw ConfigError("action index out of range");
    int level = action_index / h;
    int power = action_index % h;
    EffectiveAction a;
    a.level_index = level;
    a.power_w = powers_w[static_cast<std::size_t>(power)];
    a.rate = epsilon_outage_rate(a.power_w, quantiles[static_cast<std::size_t>(level)]);
    return a;
}

std::vector<double> power_grid(double p_max_w, int count) {
    if (!(p_max_w > 0.0) || count < 1) throw ConfigError("invalid power grid parameters");
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        grid[static_cast<std::size_t>(i)] =
            p_max_w * static_cast<double>(i + 1) / static_cast<double>(count);
    return grid;
}

EffectiveAction ContinuousActionSpace::resolve(double rate_unit, double power_unit) const {
    if (!(rate_cap > 0.0) || !(p_max_w > 0.0))
        throw ConfigError("continuous action space not configured");
    EffectiveAction a;
    a.level_index = -1;
    a.rate = rate_cap * rate_unit;
    a.power_w = p_max_w * power_unit;
    return a;
}

}  // namespace txadapt
