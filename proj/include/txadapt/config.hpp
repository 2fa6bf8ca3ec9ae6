#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "txadapt/deploy.hpp"
#include "txadapt/env.hpp"
#include "txadapt/field.hpp"
#include "txadapt/ppo.hpp"
#include "txadapt/quantile.hpp"

namespace txadapt {

// Full experiment description, parsed from a sectioned key = value file.
// Defaults reproduce the full-scale setup; the desk preset overrides scale.
struct ExperimentConfig {
    FieldConfig field;

    // [traffic]
    double lambda = 800.0;     // mean arrival, bits per slot
    int n = 400;               // channel uses per slot
    int D_max = 5;             // delay bound, slots
    double xi = 1e-3;          // tolerated delay-violation probability
    int nu = 2;                // penalty ramp exponent
    double Delta = -1.0;       // penalty ceiling; <0 selects 10 * p_max
    double budget_frac = 0.8;  // in-episode violation budget fraction
    int T = 0;                 // episode slots; 0 selects ceil(10 / xi)

    // [learning]
    TrainConfig train;         // gamma, lambda_gae, epsilon_p, lr, T_g, ...
    int Z = 500;               // training episodes per base policy
    int power_levels = 10;     // discrete power grid size H

    // [map]
    int M = 110;               // known (measured) locations
    int U = 1000;              // gain samples per known location
    int G = 10;                // outage levels, percent steps {0.01, ..., G/100}

    // [deploy]
    int K = 8;                 // clusters / base policies
    int restarts = 5;          // clustering restarts
    std::int64_t eval_slots = 100000;  // evaluation horizon per location
    int eval_pool = 100000;    // held-out gain samples per location
    std::vector<Scheme> schemes = {Scheme::power_scaling, Scheme::benchmark1,
                                   Scheme::benchmark2, Scheme::meta_adapt};

    // [meta]
    int N = 20;                // meta-task count
    int Z_meta = 100;          // meta-training episodes
    double beta = 0.3;         // outer learning rate (standardized-advantage scale)
    int inner_T_g = 0;         // inner update period; 0 inherits T_g
    int inner_epochs = 0;      // 0 inherits epochs
    int inner_minibatch = 0;   // 0 inherits minibatch
    double inner_lr = 0.0;     // 0 inherits lr
    int adapt_steps = 10;      // on-the-spot updates at a new location
    int T_ap = 1000;           // slots per adaptation update block

    // [run]
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out = "out";

    // Environment template with traffic fields applied; p_max_w stays 0 and
    // is filled per location.
    EnvConfig env_template() const;

    // Inner-loop training configuration with the meta overrides applied.
    TrainConfig inner_train() const;

    // The outage-level grid {0.01, 0.02, ..., G/100}.
    std::vector<double> level_grid() const;

    // Throws ConfigError on out-of-range or mutually inconsistent values.
    void validate() const;
};

// Parses a config file. Unknown sections or keys, malformed values, and
// failed validation all throw ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

// Same parser over an in-memory string (used by tests).
ExperimentConfig parse_config_text(const std::string& text);

}  // namespace txadapt
