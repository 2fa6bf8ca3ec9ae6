#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "txadapt/ckm.hpp"
#include "txadapt/field.hpp"
#include "txadapt/quantile.hpp"

using namespace txadapt;

namespace {

FieldConfig coarse_config() {
    FieldConfig fc;
    fc.x_min_m = -20.0;
    fc.x_max_m = 20.0;
    fc.y_min_m = -20.0;
    fc.y_max_m = 20.0;
    fc.grid_spacing_m = 4.0;
    return fc;
}

// Density the map is meant to operate at: 2 m spacing keeps neighboring
// shadowing strongly correlated, so interpolation has signal to work with.
FieldConfig design_config() {
    FieldConfig fc = coarse_config();
    fc.grid_spacing_m = 2.0;  // 21 x 21 = 441 locations
    return fc;
}

struct RecoveryOutcome {
    double map_rmse_db = 0.0;
    double baseline_rmse_db = 0.0;
};

// Builds a map from 110 known locations on the 441-point grid and scores
// held-out predictions in dB against quantiles estimated from a much larger
// reference sample.
RecoveryOutcome run_recovery(std::uint64_t field_seed) {
    FieldConfig fc = design_config();
    FieldRealization field = realize_field(fc, field_seed);
    const std::size_t m_total = field.grid.size();
    std::vector<double> levels = epsilon_levels(5, 0.01);

    std::vector<std::size_t> order(m_total);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(field_seed, "recovery-split"));
    rng.shuffle(order);
    std::vector<std::size_t> known_idx(order.begin(), order.begin() + 110);
    std::vector<std::size_t> held_idx(order.begin() + 110, order.end());

    LocationDataset known_data = sample_dataset(field, known_idx, 2000, 555);
    QuantileTable known = build_quantile_table(known_data.locations, known_data.samples, levels);
    CkmGrid ckm = build_ckm(known, field.grid);

    // Reference truth from a 10x larger i.i.d. sample at the held-out points.
    LocationDataset truth_data = sample_dataset(field, held_idx, 20000, 556);
    QuantileTable truth = build_quantile_table(truth_data.locations, truth_data.samples, levels);

    std::vector<double> level_mean_known(levels.size(), 0.0);
    for (std::size_t d = 0; d < known.location_count(); ++d)
        for (std::size_t g = 0; g < levels.size(); ++g)
            level_mean_known[g] += known.raw[d][g];
    for (double& v : level_mean_known) v /= static_cast<double>(known.location_count());

    RecoveryOutcome out;
    std::size_t count = 0;
    for (std::size_t h = 0; h < held_idx.size(); ++h) {
        std::size_t grid_i = held_idx[h];
        for (std::size_t g = 0; g < levels.size(); ++g) {
            double t_db = 10.0 * std::log10(truth.raw[h][g]);
            double m_db = 10.0 * std::log10(ckm.q_mean[grid_i][g]);
            double b_db = 10.0 * std::log10(level_mean_known[g]);
            out.map_rmse_db += (m_db - t_db) * (m_db - t_db);
            out.baseline_rmse_db += (b_db - t_db) * (b_db - t_db);
            ++count;
        }
    }
    out.map_rmse_db = std::sqrt(out.map_rmse_db / static_cast<double>(count));
    out.baseline_rmse_db = std::sqrt(out.baseline_rmse_db / static_cast<double>(count));
    return out;
}

}  // namespace

TEST_CASE("quantile maps beat the flat baseline across field draws") {
    int wins = 0;
    double map_total = 0.0, base_total = 0.0;
    const int draws = 6;
    for (int d = 0; d < draws; ++d) {
        RecoveryOutcome r = run_recovery(2200 + static_cast<std::uint64_t>(d));
        map_total += r.map_rmse_db;
        base_total += r.baseline_rmse_db;
        if (r.map_rmse_db < r.baseline_rmse_db) ++wins;
    }
    CHECK(wins >= 5);
    // Averaged over draws the map should cut the dB error noticeably; the
    // observed ratio is about 0.77, so 0.9 leaves seed headroom.
    CHECK(map_total < 0.9 * base_total);
}

TEST_CASE("held-out error shrinks as the known set grows") {
    // Nested known subsets of one field: more observations must not make the
    // interpolated quantiles worse, and the largest set must beat the
    // smallest outright (medians over 10 field draws).
    FieldConfig fc = design_config();
    const std::vector<std::size_t> sizes{20, 50, 110};
    std::vector<double> levels = epsilon_levels(5, 0.01);
    std::vector<std::vector<double>> rmse(sizes.size());
    for (int s = 0; s < 10; ++s) {
        std::uint64_t fseed = 3300 + static_cast<std::uint64_t>(s);
        FieldRealization field = realize_field(fc, fseed);
        std::vector<std::size_t> order(field.grid.size());
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(fseed, "growth-split"));
        rng.shuffle(order);
        std::vector<std::size_t> held_idx(order.begin(), order.begin() + 40);

        LocationDataset truth_data =
            sample_dataset(field, held_idx, 20000, derive_seed(fseed, "growth-truth"));
        QuantileTable truth =
            build_quantile_table(truth_data.locations, truth_data.samples, levels);

        for (std::size_t mi = 0; mi < sizes.size(); ++mi) {
            std::vector<std::size_t> known_idx(order.begin() + 40,
                                               order.begin() + 40 + static_cast<std::ptrdiff_t>(sizes[mi]));
            LocationDataset known_data =
                sample_dataset(field, known_idx, 2000, derive_seed(fseed, "growth-known"));
            QuantileTable known =
                build_quantile_table(known_data.locations, known_data.samples, levels);
            CkmGrid ckm = build_ckm(known, field.grid);

            double se = 0.0;
            std::size_t count = 0;
            for (std::size_t h = 0; h < held_idx.size(); ++h) {
                for (std::size_t g = 0; g < levels.size(); ++g) {
                    double e = ckm.q_mean[held_idx[h]][g] - truth.raw[h][g];
                    se += e * e;
                    ++count;
                }
            }
            rmse[mi].push_back(std::sqrt(se / static_cast<double>(count)));
        }
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        std::size_t n = v.size();
        return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    double m20 = median(rmse[0]);
    double m50 = median(rmse[1]);
    double m110 = median(rmse[2]);
    CHECK(m50 <= m20 * 1.05);
    CHECK(m110 <= m50 * 1.05);
    CHECK(m110 < m20 * 0.95);
}

TEST_CASE("standardized fields sampled from the kernel family are recovered") {
    // Draw a standardized field directly from the spatial kernel, observe a
    // subset, and require held-out predictions far closer than the prior.
    FieldConfig fc = coarse_config();
    std::vector<Point> grid = make_grid(fc);
    const std::size_t n = grid.size();
    KernelParams truth{1.0, 21.544346900318832, 1e-4};  // on the search grid

    Eigen::MatrixXd cov(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                kernel_value(grid[i], grid[j], truth);
    cov.diagonal().array() += 1e-8;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    REQUIRE(llt.info() == Eigen::Success);

    double mse_sum = 0.0;
    std::size_t mse_count = 0;
    for (int rep = 0; rep < 3; ++rep) {
        Rng rng(derive_seed(88, "kernel-field", static_cast<std::uint64_t>(rep)));
        Eigen::VectorXd z(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
        Eigen::VectorXd f = llt.matrixL() * z;

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        std::vector<Point> obs_x;
        Eigen::VectorXd obs_y(40);
        for (int k = 0; k < 40; ++k) {
            obs_x.push_back(grid[order[static_cast<std::size_t>(k)]]);
            obs_y(k) = f(static_cast<Eigen::Index>(order[static_cast<std::size_t>(k)]));
        }
        KernelParams fitted = fit_kernel_params(obs_x, obs_y);
        std::vector<Point> held;
        std::vector<double> held_truth;
        for (std::size_t k = 40; k < n; ++k) {
            held.push_back(grid[order[k]]);
            held_truth.push_back(f(static_cast<Eigen::Index>(order[k])));
        }
        GpPrediction pred = gp_predict(obs_x, obs_y, held, fitted);
        for (std::size_t k = 0; k < held.size(); ++k) {
            double e = pred.mean(static_cast<Eigen::Index>(k)) - held_truth[k];
            mse_sum += e * e;
            ++mse_count;
        }
    }
    double rmse = std::sqrt(mse_sum / static_cast<double>(mse_count));
    // The prior deviation is 1; interpolation from 40 of 121 points on a
    // field this smooth must do far better.
    CHECK(rmse < 0.5);
}
