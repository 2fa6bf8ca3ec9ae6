#pragma once

#include <cstdint>
#include <vector>

#include "txadapt/env.hpp"
#include "txadapt/field.hpp"
#include "txadapt/ppo.hpp"

namespace txadapt {

// One training task: a known location's traffic/channel environment with
// action bounds scaled to that location.
struct MetaTask {
    std::size_t dataset_index = 0;
    EnvConfig env;                    // p_max_w filled per location
    ContinuousActionSpace space;
    std::vector<double> pool;         // the location's known gain samples
};

// Stratifies known locations by mean gain into `count` quantile bins and
// draws one task per bin, so tasks span the gain range.
std::vector<MetaTask> build_task_set(const LocationDataset& dataset, const EnvConfig& env_template,
                                     const std::vector<double>& levels, int count,
                                     std::uint64_t seed);

struct MetaConfig {
    TrainConfig inner;      // per-task adaptation updates
    double outer_lr = 1e-3;
    // Weight of the value-error term in the outer objective. The actor
    // surrogate uses standardized advantages (unit scale) while value errors
    // carry the raw return scale; plain-gradient outer steps need the value
    // term weighted down or it dominates and diverges.
    double value_coef = 0.05;
    int episodes = 100;
    int threads = 1;
};

struct MetaResult {
    PolicyNet net;
    std::vector<double> outer_reward_curve;  // mean post-adaptation episode reward
    int skipped_outer = 0;                   // episodes with non-finite aggregate gradient
};

// First-order meta-training: each episode clones the shared parameters per
// task, adapts the clone with PPO inside one episode, collects a fresh
// trajectory under the clone, and ascends the shared parameters along the
// summed policy-gradient of those fresh trajectories.
MetaResult meta_train(const std::vector<MetaTask>& tasks, const MetaConfig& config,
                      std::uint64_t seed);

struct AdaptConfig {
    TrainConfig inner;
    int steps = 10;        // PPO updates at the new location
};

struct AdaptResult {
    PolicyNet net;
    std::vector<EpisodeStats> curve;  // one entry per update block
};

// On-the-spot fine-tuning: `steps` blocks of env.episode_slots() interactions,
// one PPO update per block. steps == 0 returns the initialization unchanged.
AdaptResult adapt(const PolicyNet& init, Env& env, const ContinuousActionSpace& space,
                  const AdaptConfig& config, std::uint64_t seed);

}  // namespace txadapt
