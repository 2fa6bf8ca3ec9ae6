#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "txadapt/errors.hpp"
#include "txadapt/policy.hpp"

using namespace txadapt;

TEST_CASE("digamma matches frozen references") {
    // psi(1) = -euler_gamma, psi(2) = 1 - euler_gamma, psi(0.5) = -euler_gamma - 2 ln 2,
    // psi(10) = H_9 - euler_gamma.
    CHECK(digamma(1.0) == doctest::Approx(-0.5772156649015329).epsilon(1e-12));
    CHECK(digamma(2.0) == doctest::Approx(0.4227843350984671).epsilon(1e-12));
    CHECK(digamma(0.5) == doctest::Approx(-1.9635100260214235).epsilon(1e-12));
    CHECK(digamma(10.0) == doctest::Approx(2.2517525890667211).epsilon(1e-12));
    // Derivative identity against lgamma by central differences.
    for (double x : {0.3, 1.7, 3.14, 12.0}) {
        double h = 1e-6;
        double fd = (std::lgamma(x + h) - std::lgamma(x - h)) / (2.0 * h);
        CHECK(digamma(x) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK_THROWS_AS(digamma(0.0), ConfigError);
}

TEST_CASE("softmax and log-sum-exp are stable and consistent") {
    Eigen::VectorXd logits(4);
    logits << 1000.0, 1001.0, 999.0, 1000.5;
    Eigen::VectorXd p = softmax(logits);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.minCoeff() > 0.0);
    for (int a = 0; a < 4; ++a)
        CHECK(categorical_log_prob(logits, a) == doctest::Approx(std::log(p(a))).epsilon(1e-10));
    CHECK(log_sum_exp(logits) == doctest::Approx(1001.0 + std::log((logits.array() - 1001.0).exp().sum())));
}

TEST_CASE("zero logits give a uniform policy with entropy ln K") {
    Eigen::VectorXd logits = Eigen::VectorXd::Zero(360);
    Eigen::VectorXd p = softmax(logits);
    for (Eigen::Index i = 0; i < p.size(); ++i)
        CHECK(p(i) == doctest::Approx(1.0 / 360.0).epsilon(1e-12));
    CHECK(categorical_entropy(logits) == doctest::Approx(std::log(360.0)).epsilon(1e-12));
}

TEST_CASE("categorical sampling follows the distribution") {
    Eigen::VectorXd logits(3);
    logits << std::log(0.5), std::log(0.3), std::log(0.2);
    Rng rng(1);
    int counts[3] = {0, 0, 0};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        CategoricalSample s = sample_categorical(logits, rng);
        ++counts[s.action];
        if (i < 100)
            CHECK(s.log_prob == doctest::Approx(categorical_log_prob(logits, s.action)));
    }
    CHECK(std::abs(counts[0] / double(n) - 0.5) < 0.01);
    CHECK(std::abs(counts[1] / double(n) - 0.3) < 0.01);
    CHECK(std::abs(counts[2] / double(n) - 0.2) < 0.01);
}

TEST_CASE("beta shapes stay above one") {
    for (double raw : {-40.0, -5.0, 0.0, 5.0, 40.0}) {
        BetaShape s = beta_shape_from_raw(raw, raw);
        CHECK(s.a >= 1.0 + 1e-6);
        CHECK(s.b >= 1.0 + 1e-6);
    }
    BetaShape big = beta_shape_from_raw(40.0, 0.0);
    CHECK(big.a == doctest::Approx(41.0).epsilon(1e-6));
}

TEST_CASE("beta log pdf matches the closed form for Beta(2,2)") {
    // Beta(2,2) density is 6 z (1 - z).
    BetaShape s{2.0, 2.0};
    for (double z : {0.1, 0.25, 0.5, 0.9}) {
        CHECK(beta_log_pdf(z, s) == doctest::Approx(std::log(6.0 * z * (1.0 - z))).epsilon(1e-12));
    }
    CHECK_THROWS_AS(beta_log_pdf(0.0, s), ConfigError);
    CHECK_THROWS_AS(beta_log_pdf(1.0, s), ConfigError);
}

TEST_CASE("beta log pdf gradient matches finite differences through softplus") {
    for (double raw_a : {-1.0, 0.4, 2.0}) {
        for (double raw_b : {-0.5, 1.2}) {
            for (double z : {0.12, 0.5, 0.87}) {
                BetaShape s = beta_shape_from_raw(raw_a, raw_b);
                double da = 0.0, db = 0.0;
                beta_log_pdf_grad_raw(z, s, raw_a, raw_b, da, db);
                double h = 1e-6;
                double up_a = beta_log_pdf(z, beta_shape_from_raw(raw_a + h, raw_b));
                double dn_a = beta_log_pdf(z, beta_shape_from_raw(raw_a - h, raw_b));
                double up_b = beta_log_pdf(z, beta_shape_from_raw(raw_a, raw_b + h));
                double dn_b = beta_log_pdf(z, beta_shape_from_raw(raw_a, raw_b - h));
                CHECK(da == doctest::Approx((up_a - dn_a) / (2 * h)).epsilon(1e-5));
                CHECK(db == doctest::Approx((up_b - dn_b) / (2 * h)).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("beta policy samples stay in the open interval with matching log prob") {
    Rng rng(17);
    Eigen::VectorXd raw(4);
    raw << 0.5, -0.3, 1.2, 0.1;
    for (int i = 0; i < 2000; ++i) {
        BetaSampleResult s = sample_beta_policy(raw, rng);
        REQUIRE(s.unit.size() == 2);
        CHECK(s.unit(0) > 0.0);
        CHECK(s.unit(0) < 1.0);
        CHECK(s.unit(1) > 0.0);
        CHECK(s.unit(1) < 1.0);
        CHECK(s.log_prob == doctest::Approx(beta_policy_log_prob(raw, s.unit)).epsilon(1e-12));
    }
}

TEST_CASE("checkpoints round-trip both head kinds bit for bit") {
    Rng rng(23);
    auto dir = std::filesystem::temp_directory_path();
    for (int kind = 0; kind < 2; ++kind) {
        PolicyNet net = kind == 0 ? PolicyNet::make_categorical(2, 360, rng)
                                  : PolicyNet::make_beta(2, 2, rng);
        auto path = dir / ("txadapt_ckpt_" + std::to_string(kind) + ".bin");
        save_checkpoint(path, net);
        PolicyNet back = load_checkpoint(path);
        CHECK(back.head == net.head);
        CHECK(back.action_dims == net.action_dims);
        std::vector<double> a1, a2;
        net.actor.flatten(a1);
        back.actor.flatten(a2);
        REQUIRE(a1.size() == a2.size());
        for (std::size_t i = 0; i < a1.size(); ++i) REQUIRE(a1[i] == a2[i]);
        net.critic.flatten(a1);
        back.critic.flatten(a2);
        for (std::size_t i = 0; i < a1.size(); ++i) REQUIRE(a1[i] == a2[i]);
        std::filesystem::remove(path);
    }
}

TEST_CASE("corrupt checkpoints are rejected") {
    auto path = std::filesystem::temp_directory_path() / "txadapt_ckpt_bad.bin";
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOTACKPT and some garbage bytes";
    }
    CHECK_THROWS_AS(load_checkpoint(path), FileFormatError);
    CHECK_THROWS_AS(load_checkpoint(path.parent_path() / "txadapt_missing.bin"), FileFormatError);
    std::filesystem::remove(path);
}
