#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "txadapt/env.hpp"
#include "txadapt/policy.hpp"

namespace txadapt {

struct Transition {
    Eigen::Vector2d obs = Eigen::Vector2d::Zero();
    Eigen::Vector2d next_obs = Eigen::Vector2d::Zero();
    int action = -1;                  // categorical head
    Eigen::VectorXd unit_action;      // Beta head, (0,1) coordinates
    double reward = 0.0;
    double log_prob = 0.0;
    double value = 0.0;               // critic estimate at collection time
    bool done = false;                // episode ended after this step
};

struct ReplayBuffer {
    std::vector<Transition> items;

    void clear() { items.clear(); }
    std::size_t size() const { return items.size(); }
};

struct TrainConfig {
    double clip_ratio = 0.2;
    double discount = 0.99;
    double gae_lambda = 0.95;     // 0 reproduces the one-step advantage
    int epochs = 15;
    int minibatch = 128;
    int update_period = 2000;     // environment steps between updates
    double entropy_coef = 1e-3;   // categorical head only
    double learning_rate = 2e-4;  // both networks, Adam
};

// Generalized advantage estimates over a buffer collected under the net's
// current parameters. Raw advantages satisfy the one-step identity when
// gae_lambda == 0; normalized advantages are what the update consumes.
struct AdvantageResult {
    std::vector<double> raw;
    std::vector<double> normalized;
    std::vector<double> returns;  // critic regression targets
};

AdvantageResult advantage_estimates(const ReplayBuffer& buffer, const PolicyNet& net,
                                    const TrainConfig& config);

struct UpdateStats {
    bool aborted = false;         // non-finite loss or gradient; params restored
    double actor_loss = 0.0;      // last-epoch means
    double critic_loss = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
};

// One PPO update: `epochs` passes of shuffled minibatches with the clipped
// surrogate. Restores the pre-update parameters if anything non-finite shows up.
UpdateStats ppo_update(PolicyNet& net, Adam& actor_opt, Adam& critic_opt,
                       const ReplayBuffer& buffer, const TrainConfig& config, Rng& rng);

// Plain policy-gradient + critic gradients of the surrogate objective at the
// net's current parameters (probability ratios are identically 1).
// actor_grad is an ascent direction on expected advantage; critic_grad is a
// descent direction on value error.
struct ObjectiveGrads {
    Mlp::Grad actor;
    Mlp::Grad critic;
    bool finite = true;
};

ObjectiveGrads objective_gradients(const PolicyNet& net, const ReplayBuffer& buffer,
                                   const TrainConfig& config);

// How sampled head outputs become transmit decisions.
struct ActionSpec {
    DiscreteActionSpace discrete;
    ContinuousActionSpace continuous;
};

struct SampledAction {
    EffectiveAction effective;
    Transition partial;  // obs/action/log_prob/value filled
};

SampledAction sample_action(const PolicyNet& net, const ActionSpec& spec,
                            const Observation& obs, Rng& rng);

struct EpisodeStats {
    double total_reward = 0.0;
    double avg_power_w = 0.0;
    double dvp = 0.0;
    std::int64_t violations = 0;
};

struct TrainResult {
    std::vector<EpisodeStats> curve;
    int updates = 0;
    int aborted_updates = 0;
};

// On-policy training: episodes of env.episode_slots() steps, an update every
// config.update_period collected steps. The buffer persists across episode
// boundaries (done flags stop advantage bootstrap at each boundary).
TrainResult train_policy(PolicyNet& net, Env& env, const ActionSpec& spec,
                         const TrainConfig& config, int episodes, std::uint64_t seed);

struct EvalResult {
    double avg_power_w = 0.0;
    double dvp = 0.0;
    std::int64_t violations = 0;
    std::int64_t slots = 0;
};

// Frozen-policy rollout with continuous queue accounting (no episode resets).
// level_power_scale, when given, multiplies transmit power per outage level
// after the rate is fixed (spatial power adaptation).
EvalResult evaluate_policy(const PolicyNet& net, Env& env, const ActionSpec& spec,
                           std::int64_t slots, std::uint64_t seed,
                           const std::vector<double>* level_power_scale = nullptr);

}  // namespace txadapt
