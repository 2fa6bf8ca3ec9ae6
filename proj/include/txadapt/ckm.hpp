#pragma once

#include <filesystem>
#include <vector>

#include "txadapt/gp.hpp"
#include "txadapt/quantile.hpp"

namespace txadapt {

// Spatial map of channel-gain quantiles: one independent GP per outage level,
// fit on standardized known-location quantiles and evaluated on the full grid.
struct CkmGrid {
    std::vector<Point> grid;
    std::vector<double> levels;
    // [location][level]
    std::vector<std::vector<double>> q_mean;       // de-standardized, clamped >= 1e-12
    std::vector<std::vector<double>> q_var;        // de-standardized variance
    std::vector<KernelParams> fitted;              // per level

    std::size_t location_count() const { return grid.size(); }
    std::size_t level_count() const { return levels.size(); }

    // Believed quantile vector at one grid location.
    std::vector<double> quantiles_at(std::size_t loc) const { return q_mean.at(loc); }
};

// threads parallelizes over outage levels; results do not depend on it.
CkmGrid build_ckm(const QuantileTable& known, const std::vector<Point>& grid, int threads = 1);

void write_ckm(const std::filesystem::path& path, const CkmGrid& ckm);
CkmGrid read_ckm(const std::filesystem::path& path);

// Index of the grid point equal to p (within a small tolerance).
std::size_t grid_index_of(const std::vector<Point>& grid, const Point& p);

}  // namespace txadapt
