#include <cmath>
#include <vector>

#include "doctest.h"
#include "txadapt/errors.hpp"
#include "txadapt/report.hpp"

using namespace txadapt;

namespace {

double round4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

TEST_CASE("confidence intervals match the published arithmetic") {
    // 441-location normal-approximation intervals, compared at 4 decimals.
    auto [lo1, hi1] = availability_interval(0.9955, 441);
    CHECK(round4(lo1) == 0.9893);
    CHECK(hi1 == 1.0);  // upper end clamps at 100%

    auto [lo2, hi2] = availability_interval(0.4422, 441);
    CHECK(round4(lo2) == 0.3958);
    CHECK(round4(hi2) == 0.4886);
}

TEST_CASE("degenerate fractions give zero-width clamped intervals") {
    auto [lo0, hi0] = availability_interval(0.0, 100);
    CHECK(lo0 == 0.0);
    CHECK(hi0 == 0.0);
    auto [lo1, hi1] = availability_interval(1.0, 100);
    CHECK(lo1 == 1.0);
    CHECK(hi1 == 1.0);
    CHECK_THROWS_AS(availability_interval(0.5, 0), ConfigError);
}

TEST_CASE("availability counts locations at or below the target") {
    std::vector<double> dvps = {0.005, 0.01, 0.02};
    AvailabilityEntry a = availability(dvps, 0.01);
    CHECK(a.locations == 3);
    CHECK(a.p_hat == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(a.ci_lo >= 0.0);
    CHECK(a.ci_hi <= 1.0);
    CHECK(a.ci_lo < a.p_hat);
    CHECK(a.ci_hi > a.p_hat);
    CHECK_THROWS_AS(availability({}, 0.01), ConfigError);
}
