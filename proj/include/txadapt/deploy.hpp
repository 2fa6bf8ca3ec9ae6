#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "txadapt/ckm.hpp"
#include "txadapt/cluster.hpp"
#include "txadapt/field.hpp"
#include "txadapt/ppo.hpp"

namespace txadapt {

// Transmit power that preserves the source policy's outage level at the
// target: the SNR argument p * q stays fixed, so the source rate still
// survives the target's epsilon-quantile.
double scale_power(double source_power_w, double source_quantile, double target_quantile);

enum class Scheme {
    power_scaling,   // map-assigned cluster policy + per-level power scaling
    benchmark1,      // nearest base's policy + per-level power scaling
    benchmark2,      // nearest base's policy, powers unchanged
    meta_adapt,      // meta-initialized policy fine-tuned on the spot
};

std::string scheme_name(Scheme s);

// Everything needed to run one cluster policy somewhere else.
struct SourcePolicy {
    PolicyNet net;
    DiscreteActionSpace actions;        // built from the base location's quantiles
};

struct DeploymentPlan {
    Scheme scheme = Scheme::power_scaling;
    std::vector<int> source_cluster;               // per grid location
    std::vector<std::vector<double>> level_scale;  // per grid location, per level
};

// Builds the per-location source assignment and power ratios.
// power_scaling assigns by the clustering of map quantile vectors;
// benchmarks assign by geometric distance to the base locations.
DeploymentPlan make_plan(Scheme scheme, const CkmGrid& ckm, const std::vector<int>& assignment,
                         const std::vector<int>& base_known_index, const QuantileTable& known,
                         const std::vector<Point>& base_points);

struct LocationOutcome {
    Point where;
    double avg_power_w = 0.0;
    double dvp = 0.0;
};

struct SchemeEvalConfig {
    EnvConfig env;                 // p_max_w ignored; filled per source policy
    std::int64_t horizon = 10000;  // evaluation slots per location
    int pool_size = 100000;        // held-out gain samples per location
    int threads = 1;
};

// Rolls every grid location under the plan against fresh per-location pools.
std::vector<LocationOutcome> evaluate_plan(const DeploymentPlan& plan,
                                           const std::vector<SourcePolicy>& bank,
                                           const FieldRealization& field,
                                           const SchemeEvalConfig& config, std::uint64_t seed);

void write_results(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::vector<LocationOutcome>>>& by_scheme);

}  // namespace txadapt
