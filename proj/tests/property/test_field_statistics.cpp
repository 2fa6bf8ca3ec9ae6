#include <cmath>
#include <vector>

#include "doctest.h"
#include "txadapt/field.hpp"

using namespace txadapt;

namespace {

FieldConfig coarse_config() {
    FieldConfig fc;
    fc.x_min_m = -20.0;
    fc.x_max_m = 20.0;
    fc.y_min_m = -20.0;
    fc.y_max_m = 20.0;
    fc.grid_spacing_m = 4.0;  // 121 locations
    return fc;
}

}  // namespace

TEST_CASE("shadowing decorrelates at the configured distance") {
    // Correlation between points exactly one correlation-distance apart must
    // approach exp(-1); estimated across independent realizations.
    FieldConfig fc = coarse_config();
    fc.shadow_corr_dist_m = 12.0;  // three grid steps, so exact pairs exist
    const int realizations = 150;

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<Point> grid = make_grid(fc);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = i + 1; j < grid.size(); ++j)
            if (std::abs(distance(grid[i], grid[j]) - fc.shadow_corr_dist_m) < 1e-9)
                pairs.emplace_back(i, j);
    REQUIRE(pairs.size() > 100);

    double sum_xy = 0.0, sum_xx = 0.0;
    for (int r = 0; r < realizations; ++r) {
        FieldRealization f = realize_field(fc, 1000 + static_cast<std::uint64_t>(r));
        for (auto [i, j] : pairs) {
            sum_xy += f.shadow_db[i] * f.shadow_db[j];
            sum_xx += 0.5 * (f.shadow_db[i] * f.shadow_db[i] + f.shadow_db[j] * f.shadow_db[j]);
        }
    }
    double corr = sum_xy / sum_xx;
    CHECK(corr == doctest::Approx(std::exp(-1.0)).epsilon(0.15));
}

TEST_CASE("shadowing is zero-mean with the configured deviation") {
    FieldConfig fc = coarse_config();
    const int realizations = 150;
    double sum = 0.0, sum_sq = 0.0;
    std::size_t count = 0;
    for (int r = 0; r < realizations; ++r) {
        FieldRealization f = realize_field(fc, 5000 + static_cast<std::uint64_t>(r));
        for (double s : f.shadow_db) {
            sum += s;
            sum_sq += s * s;
            ++count;
        }
    }
    double mean = sum / static_cast<double>(count);
    double var = sum_sq / static_cast<double>(count) - mean * mean;
    // Spatial correlation shrinks the effective sample count; keep margins wide.
    CHECK(std::abs(mean) < 1.5);
    CHECK(std::sqrt(var) == doctest::Approx(fc.shadow_sigma_db).epsilon(0.1));
}

TEST_CASE("average received level tracks the path-loss line") {
    FieldConfig fc = coarse_config();
    // One realization's spatially averaged shadowing has sd ~3.4 dB (the
    // correlation length leaves only ~5 independent patches per field), so
    // the R-realization mean has sd ~3.4/sqrt(R). R = 400 puts the 0.8 dB
    // bound at about 4.7 sigma.
    const int realizations = 400;
    std::vector<Point> grid = make_grid(fc);
    std::vector<double> bias(grid.size(), 0.0);
    for (int r = 0; r < realizations; ++r) {
        FieldRealization f = realize_field(fc, 9000 + static_cast<std::uint64_t>(r));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double level_db = 10.0 * std::log10(f.mean_gain[i] * fc.noise_power_w);
            bias[i] += level_db - path_loss_db(fc, grid[i]);
        }
    }
    double total = 0.0;
    for (double& b : bias) {
        b /= realizations;
        total += b;
    }
    total /= static_cast<double>(grid.size());
    CHECK(std::abs(total) < 0.8);
}

TEST_CASE("exponential small-scale fading has the right median and tail") {
    FieldConfig fc = coarse_config();
    FieldRealization f = realize_field(fc, 321);
    const std::size_t loc = 60;
    std::vector<double> pool = sample_location(f, loc, 40000, 17);
    const double g = f.mean_gain[loc];
    int below_median = 0, above_e = 0;
    for (double s : pool) {
        if (s <= g * std::log(2.0)) ++below_median;
        if (s > g) ++above_e;
    }
    double frac_median = below_median / static_cast<double>(pool.size());
    double frac_tail = above_e / static_cast<double>(pool.size());
    CHECK(frac_median == doctest::Approx(0.5).epsilon(0.03));
    CHECK(frac_tail == doctest::Approx(std::exp(-1.0)).epsilon(0.05));
}

TEST_CASE("large grids switch to conditioned sampling and keep the statistics") {
    FieldConfig fc = coarse_config();
    fc.grid_spacing_m = 0.8;  // 51 x 51 = 2601 points: beyond the dense path
    FieldRealization f = realize_field(fc, 77);
    REQUIRE(f.grid.size() == 2601);
    double sum = 0.0, sum_sq = 0.0;
    for (double s : f.shadow_db) {
        sum += s;
        sum_sq += s * s;
    }
    double mean = sum / static_cast<double>(f.grid.size());
    double sdev = std::sqrt(sum_sq / static_cast<double>(f.grid.size()) - mean * mean);
    // One realization only: the spatial mean wanders but the deviation is
    // anchored by thousands of (correlated) draws.
    CHECK(std::abs(mean) < 6.0);
    CHECK(sdev > 4.0);
    CHECK(sdev < 13.0);
}
