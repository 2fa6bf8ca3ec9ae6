#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "txadapt/geometry.hpp"

namespace txadapt {

// Non-parametric lower epsilon-quantile: the r-th smallest sample with
// r = floor(U * epsilon), 1-indexed. Throws UndefinedStatisticError when
// U * epsilon < 1 (no order statistic exists at that level).
double estimate_quantile(std::span<const double> samples, double epsilon);

// Evenly spaced outage levels {step, 2*step, ..., count*step}.
std::vector<double> epsilon_levels(int count, double step);

// Per-location channel-gain quantiles over a grid of outage levels, with
// per-level standardization (zero mean, unit deviation across locations).
struct QuantileTable {
    std::vector<Point> locations;                    // M rows
    std::vector<double> levels;                      // G outage levels, increasing
    std::vector<std::vector<double>> raw;            // [M][G]
    std::vector<std::vector<double>> standardized;   // [M][G]
    std::vector<double> level_mean;                  // [G]
    std::vector<double> level_sdev;                  // [G], population deviation

    std::size_t location_count() const { return locations.size(); }
    std::size_t level_count() const { return levels.size(); }
};

// Builds the table from per-location sample sets. Degenerate levels
// (deviation below 1e-12) standardize to all zeros and record deviation 1.
QuantileTable build_quantile_table(const std::vector<Point>& locations,
                                   const std::vector<std::vector<double>>& samples,
                                   const std::vector<double>& levels);

void write_quantile_table(const std::filesystem::path& path, const QuantileTable& table);
QuantileTable read_quantile_table(const std::filesystem::path& path);

}  // namespace txadapt
