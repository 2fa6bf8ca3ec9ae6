#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "txadapt/geometry.hpp"
#include "txadapt/rng.hpp"

namespace txadapt {

enum class FadingKind { rayleigh, rician };

// Substitute for a measured radio environment: log-distance path loss,
// exponentially correlated log-normal shadowing, i.i.d. small-scale fading.
// Gains are noise-normalized (SNR per watt of transmit power).
struct FieldConfig {
    double x_min_m = -20.0, x_max_m = 20.0;
    double y_min_m = -20.0, y_max_m = 20.0;
    double grid_spacing_m = 2.0;

    double bs_x_m = 0.0, bs_y_m = 100.0;
    double bs_height_m = 10.0;
    double device_height_m = 1.5;

    double ref_gain_db = -31.2;        // channel gain at 1 m
    double path_loss_exponent = 3.53;
    double shadow_sigma_db = 8.0;
    double shadow_corr_dist_m = 10.0;

    FadingKind fading = FadingKind::rayleigh;
    double rician_k = 0.0;             // LOS factor; infinity disables fading

    double noise_power_w = 3.1622776601683794e-15;  // -115 dBm

    void validate() const;
};

// One draw of the large-scale field over the location grid.
struct FieldRealization {
    FieldConfig config;
    std::uint64_t seed = 0;
    std::vector<Point> grid;
    std::vector<double> mean_gain;   // E{gain | location}, linear, noise-normalized
    std::vector<double> shadow_db;   // shadowing component, for diagnostics
};

// Per-location channel gain samples drawn from a realization.
struct LocationDataset {
    std::vector<Point> locations;
    std::vector<std::vector<double>> samples;  // [location][sample]
    std::vector<double> mean_gain;             // large-scale mean at each location
};

std::vector<Point> make_grid(const FieldConfig& config);

// Deterministic path loss in dB at a location (3D distance to the base).
double path_loss_db(const FieldConfig& config, const Point& p);

// Draws the jointly correlated shadowing field and combines it with path
// loss. Uses a dense Cholesky factor up to 2000 locations and sequential
// nearest-neighbor conditioning beyond that.
FieldRealization realize_field(const FieldConfig& config, std::uint64_t seed);

// Draws `count` i.i.d. small-scale fades per requested location.
// Sample streams are keyed by location index, so any subset of locations
// yields the same values as the full set.
LocationDataset sample_dataset(const FieldRealization& field, std::span<const std::size_t> loc_indices,
                               int count, std::uint64_t seed);

// One location's sample stream (used for large held-out evaluation pools).
std::vector<double> sample_location(const FieldRealization& field, std::size_t loc_index,
                                    int count, std::uint64_t seed);

// Field artifact IO: x_m,y_m,gain columns by grid order.
void write_field(const std::filesystem::path& path, const FieldRealization& field);
FieldRealization read_field(const std::filesystem::path& path, const FieldConfig& config,
                            std::uint64_t seed);

// Dataset artifact IO.
void write_dataset(const std::filesystem::path& path, const LocationDataset& dataset);
LocationDataset read_dataset(const std::filesystem::path& path);

FadingKind parse_fading(const std::string& name);

}  // namespace txadapt
