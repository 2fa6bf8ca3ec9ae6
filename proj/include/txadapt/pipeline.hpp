#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "txadapt/config.hpp"

namespace txadapt {

enum class Stage {
    field,       // generate-field
    quantiles,   // estimate-quantiles
    ckm,         // build-ckm
    cluster,     // cluster
    train_base,  // train-base
    train_meta,  // train-meta
    evaluate,    // evaluate
    report,      // report
};

std::string stage_name(Stage s);
Stage parse_stage(const std::string& name);
const std::vector<Stage>& all_stages();

// Runs one stage against the config's output directory. Existing outputs are
// left alone unless force is set; missing inputs raise StageError naming the
// producing stage. Returns true when work was done, false on skip.
bool run_stage(const ExperimentConfig& cfg, Stage stage, bool force);

// All stages in order.
void run_pipeline(const ExperimentConfig& cfg, bool force);

// Discrete action-space artifact IO (component,index,value rows).
void write_action_space(const std::filesystem::path& path, const DiscreteActionSpace& space);
DiscreteActionSpace read_action_space(const std::filesystem::path& path);

struct SweepCell {
    double xi = 0.0;
    int d_max = 0;
    double avg_power_w = 0.0;
    double dvp = 0.0;
};

// Trains and evaluates one single-location policy per (xi, D_max) pair on a
// unit-mean fading channel; isolates the QoS knobs from spatial effects.
std::vector<SweepCell> sweep_qos(const ExperimentConfig& cfg, const std::vector<double>& xis,
                                 const std::vector<int>& dmaxs, std::uint64_t seed);

void write_sweep(const std::filesystem::path& path, const std::vector<SweepCell>& cells);

}  // namespace txadapt
