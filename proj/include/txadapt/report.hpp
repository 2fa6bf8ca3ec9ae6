#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "txadapt/config.hpp"
#include "txadapt/deploy.hpp"
#include "txadapt/geometry.hpp"

namespace txadapt {

// 95% normal-approximation confidence interval for a success fraction,
// clamped to [0, 1].
std::pair<double, double> availability_interval(double p_hat, std::size_t locations);

struct AvailabilityEntry {
    double p_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t locations = 0;
};

// Fraction of locations whose DVP stays at or below the target, with its
// confidence interval. Throws ConfigError on an empty list.
AvailabilityEntry availability(std::span<const double> dvps, double xi);

// Reads a results artifact back into per-scheme location outcomes.
std::vector<std::pair<std::string, std::vector<LocationOutcome>>> read_results(
    const std::filesystem::path& path);

// Standalone SVG heatmap over the location grid: one colored cell per point,
// color ramp legend on the right. Values map linearly onto the ramp.
void write_heatmap_svg(const std::filesystem::path& path, const std::vector<Point>& grid,
                       const std::vector<double>& values, const std::string& title);

// Emits report.md plus one power map and one DVP map per scheme into dir.
void write_report(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                  const std::vector<std::pair<std::string, std::vector<LocationOutcome>>>& by_scheme);

}  // namespace txadapt
