#include <cmath>
#include <filesystem>
#include <limits>
#include <vector>

#include "doctest.h"
#include "txadapt/errors.hpp"
#include "txadapt/field.hpp"

using namespace txadapt;

namespace {

FieldConfig small_config() {
    FieldConfig fc;
    fc.x_min_m = -20.0;
    fc.x_max_m = 20.0;
    fc.y_min_m = -20.0;
    fc.y_max_m = 20.0;
    fc.grid_spacing_m = 4.0;
    return fc;
}

}  // namespace

TEST_CASE("grids enumerate x first at the documented sizes") {
    FieldConfig fc;  // defaults: [-20, 20] at 2 m
    std::vector<Point> grid = make_grid(fc);
    REQUIRE(grid.size() == 441);
    CHECK(grid[0] == Point{-20.0, -20.0});
    CHECK(grid[1] == Point{-18.0, -20.0});
    CHECK(grid[21] == Point{-20.0, -18.0});
    CHECK(grid.back() == Point{20.0, 20.0});

    std::vector<Point> coarse = make_grid(small_config());
    REQUIRE(coarse.size() == 121);
}

TEST_CASE("path loss follows the log-distance line in 3D") {
    FieldConfig fc = small_config();
    Point p{0.0, 0.0};
    double dx = p.x - fc.bs_x_m;
    double dy = p.y - fc.bs_y_m;
    double dz = fc.bs_height_m - fc.device_height_m;
    double d = std::sqrt(dx * dx + dy * dy + dz * dz);
    double expect = fc.ref_gain_db - 10.0 * fc.path_loss_exponent * std::log10(d);
    CHECK(path_loss_db(fc, p) == doctest::Approx(expect).epsilon(1e-12));

    // Inside the 1 m reference distance the loss freezes at the reference.
    FieldConfig near = fc;
    near.bs_x_m = 0.0;
    near.bs_y_m = 0.0;
    near.bs_height_m = 1.5;
    near.device_height_m = 1.5;
    CHECK(path_loss_db(near, {0.0, 0.5}) == doctest::Approx(fc.ref_gain_db).epsilon(1e-12));
}

TEST_CASE("field realizations are deterministic in the seed") {
    FieldConfig fc = small_config();
    FieldRealization a = realize_field(fc, 42);
    FieldRealization b = realize_field(fc, 42);
    FieldRealization c = realize_field(fc, 43);
    REQUIRE(a.grid.size() == b.grid.size());
    bool all_equal = true;
    bool any_diff_c = false;
    for (std::size_t i = 0; i < a.grid.size(); ++i) {
        all_equal = all_equal && a.mean_gain[i] == b.mean_gain[i] &&
                    a.shadow_db[i] == b.shadow_db[i];
        any_diff_c = any_diff_c || a.shadow_db[i] != c.shadow_db[i];
    }
    CHECK(all_equal);
    CHECK(any_diff_c);
}

TEST_CASE("mean gain combines path loss and shadowing over noise") {
    FieldConfig fc = small_config();
    FieldRealization f = realize_field(fc, 7);
    for (std::size_t i = 0; i < f.grid.size(); i += 17) {
        double db = path_loss_db(fc, f.grid[i]) + f.shadow_db[i];
        double expect = std::pow(10.0, db / 10.0) / fc.noise_power_w;
        CHECK(f.mean_gain[i] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(f.mean_gain[i] > 0.0);
    }
}

TEST_CASE("sample streams are keyed by location so subsets match the full set") {
    FieldConfig fc = small_config();
    FieldRealization f = realize_field(fc, 9);
    std::vector<std::size_t> all = {0, 1, 2, 3, 4, 5, 6};
    std::vector<std::size_t> subset = {2, 5};
    LocationDataset full = sample_dataset(f, all, 40, 1001);
    LocationDataset sub = sample_dataset(f, subset, 40, 1001);
    REQUIRE(sub.locations.size() == 2);
    for (int j = 0; j < 40; ++j) {
        REQUIRE(sub.samples[0][static_cast<std::size_t>(j)] ==
                full.samples[2][static_cast<std::size_t>(j)]);
        REQUIRE(sub.samples[1][static_cast<std::size_t>(j)] ==
                full.samples[5][static_cast<std::size_t>(j)]);
    }
    CHECK(sub.mean_gain[0] == f.mean_gain[2]);

    // The single-location pool draw is the same stream again.
    std::vector<double> pool = sample_location(f, 5, 40, 1001);
    for (int j = 0; j < 40; ++j)
        REQUIRE(pool[static_cast<std::size_t>(j)] == full.samples[5][static_cast<std::size_t>(j)]);
}

TEST_CASE("an infinite LOS factor removes small-scale fading entirely") {
    FieldConfig fc = small_config();
    fc.fading = FadingKind::rician;
    fc.rician_k = std::numeric_limits<double>::infinity();
    FieldRealization f = realize_field(fc, 3);
    std::vector<std::size_t> locs = {0, 60};
    LocationDataset d = sample_dataset(f, locs, 10, 5);
    for (std::size_t m = 0; m < 2; ++m)
        for (double s : d.samples[m]) REQUIRE(s == f.mean_gain[locs[m]]);
}

TEST_CASE("sample means track the location mean gain") {
    FieldConfig fc = small_config();
    SUBCASE("unit-mean exponential fading") { fc.fading = FadingKind::rayleigh; }
    SUBCASE("unit-mean LOS fading") {
        fc.fading = FadingKind::rician;
        fc.rician_k = 3.0;
    }
    FieldRealization f = realize_field(fc, 21);
    std::vector<double> pool = sample_location(f, 33, 20000, 77);
    double mean = 0.0;
    for (double s : pool) {
        REQUIRE(s > 0.0);
        mean += s;
    }
    mean /= static_cast<double>(pool.size());
    CHECK(mean / f.mean_gain[33] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("field files round-trip bitwise") {
    FieldConfig fc = small_config();
    FieldRealization f = realize_field(fc, 31);
    auto path = std::filesystem::temp_directory_path() / "txadapt_test_field.csv";
    write_field(path, f);
    FieldRealization back = read_field(path, fc, 31);
    REQUIRE(back.grid.size() == f.grid.size());
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
        REQUIRE(back.grid[i] == f.grid[i]);
        REQUIRE(back.mean_gain[i] == f.mean_gain[i]);
        REQUIRE(back.shadow_db[i] == f.shadow_db[i]);
    }
    std::filesystem::remove(path);
}

TEST_CASE("dataset files keep nine significant digits") {
    FieldConfig fc = small_config();
    FieldRealization f = realize_field(fc, 13);
    std::vector<std::size_t> locs = {0, 7, 19};
    LocationDataset d = sample_dataset(f, locs, 25, 3);
    auto path = std::filesystem::temp_directory_path() / "txadapt_test_dataset.csv";
    write_dataset(path, d);
    LocationDataset back = read_dataset(path);
    REQUIRE(back.locations.size() == 3);
    for (std::size_t m = 0; m < 3; ++m) {
        CHECK(std::abs(back.locations[m].x - d.locations[m].x) < 1e-9);
        REQUIRE(back.samples[m].size() == 25);
        for (std::size_t j = 0; j < 25; ++j)
            CHECK(back.samples[m][j] ==
                  doctest::Approx(d.samples[m][j]).epsilon(1e-8));
    }
    std::filesystem::remove(path);
}

TEST_CASE("fading names parse strictly") {
    CHECK(parse_fading("rayleigh") == FadingKind::rayleigh);
    CHECK(parse_fading("rician") == FadingKind::rician);
    CHECK_THROWS_AS(parse_fading("nakagami"), ConfigError);
}

TEST_CASE("config validation rejects degenerate extents") {
    FieldConfig fc = small_config();
    fc.grid_spacing_m = 0.0;
    CHECK_THROWS_AS(fc.validate(), ConfigError);
    fc = small_config();
    fc.x_max_m = fc.x_min_m - 1.0;
    CHECK_THROWS_AS(fc.validate(), ConfigError);
    fc = small_config();
    fc.noise_power_w = 0.0;
    CHECK_THROWS_AS(fc.validate(), ConfigError);
}
