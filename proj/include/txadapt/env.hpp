#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "txadapt/queue.hpp"
#include "txadapt/rng.hpp"

namespace txadapt {

// Peak transmit power that funds the empty-queue fallback policy: sending
// every arrival within d_max slots at the most conservative outage split.
// mean_gain is the location's average noise-normalized channel gain.
double peak_power(double lambda_bits, int channel_uses, double dvp_target, int d_max,
                  double mean_gain);

// Rate (bits per channel use) that survives an outage-level quantile of the
// gain distribution at the given transmit power.
double epsilon_outage_rate(double power_w, double gain_quantile);

// Penalty added to the reward on a violating slot: ramps with the episode's
// cumulative violation count against the budget slots*target, then saturates.
double violation_penalty(std::int64_t violations, double budget, double delta, int nu);

// What a policy decision resolves to once believed quantiles are applied.
struct EffectiveAction {
    double power_w = 0.0;
    double rate = 0.0;       // bits per channel use
    int level_index = -1;    // outage level chosen, -1 for continuous actions
};

struct EnvConfig {
    double lambda_bits = 800.0;    // mean arrival per slot
    int channel_uses = 400;        // symbols per slot
    int d_max = 5;                 // delay bound, slots
    double dvp_target = 1e-3;      // tolerated delay-violation probability
    double budget_frac = 0.8;      // in-episode violation budget fraction
    int nu = 2;                    // penalty ramp exponent
    double delta = -1.0;           // penalty ceiling; <0 selects 10 * p_max
    int episode_slots = 0;         // 0 selects ceil(10 / dvp_target)
    double p_max_w = 0.0;          // peak power; must be set before use
};

struct Observation {
    double queue_norm = 0.0;    // backlog / (d_max * lambda)
    double arrival_norm = 0.0;  // current arrival / lambda
};

struct StepResult {
    Observation next;
    double reward = 0.0;
    bool outage = false;
    bool violation = false;
    bool done = false;          // episode boundary
    double power_w = 0.0;
    double rate = 0.0;
    std::int64_t served_bits = 0;
    std::int64_t queue_after = 0;
    std::int64_t arrival_bits = 0;  // the arrival consumed this slot
};

// Channel gain source for one location. Pool mode draws uniformly (with
// replacement) from a finite sample pool; quantile mode draws a uniform rank
// and maps it through an inverse distribution, which lets two environments
// share the exact same rank sequence.
struct ChannelSource {
    std::vector<double> pool;
    std::function<double(double)> quantile_fn;

    double draw(Rng& rng) const;
};

// Slot-level transmission MDP: Poisson arrivals into a delay-bounded queue,
// service decided by (power, rate), reward = -power - violation penalty.
class Env {
public:
    Env(const EnvConfig& config, ChannelSource channel, std::uint64_t seed);

    // Starts a new episode: backlog, window, and violation budget reset.
    Observation reset();

    // Advances one slot, drawing the channel gain internally.
    StepResult step(const EffectiveAction& action);

    // Advances one slot with an externally supplied gain draw.
    StepResult step_with_gain(const EffectiveAction& action, double gain);

    Observation observation() const;

    const EnvConfig& config() const { return config_; }
    int episode_slots() const { return episode_slots_; }
    double violation_budget() const { return budget_; }
    double delta() const { return delta_; }
    std::int64_t episode_violations() const { return queue_.violations(); }
    double episode_dvp() const { return queue_.empirical_dvp(); }

private:
    EnvConfig config_;
    ChannelSource channel_;
    DelayQueue queue_;
    Rng arrival_rng_;
    Rng channel_rng_;
    std::int64_t pending_arrival_ = 0;
    int slot_in_episode_ = 0;
    int episode_slots_ = 0;
    double budget_ = 0.0;
    double delta_ = 0.0;
    bool started_ = false;
};

// Discrete action catalog: outage-level grid x evenly spaced power grid.
struct DiscreteActionSpace {
    std::vector<double> levels;        // believed outage levels (increasing)
    std::vector<double> quantiles;     // believed gain quantile per level
    std::vector<double> powers_w;      // power grid (increasing)

    int count() const { return static_cast<int>(levels.size() * powers_w.size()); }
    EffectiveAction resolve(int action_index) const;
};

// Evenly spaced power grid {p_max/count, 2*p_max/count, ..., p_max}.
std::vector<double> power_grid(double p_max_w, int count);

// Continuous action bounds for the two-dimensional (rate, power) policy.
struct ContinuousActionSpace {
    double rate_cap = 0.0;   // log2(1 + p_max * largest believed quantile)
    double p_max_w = 0.0;

    EffectiveAction resolve(double rate_unit, double power_unit) const;
};

}  // namespace txadapt
