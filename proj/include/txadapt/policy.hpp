#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>

#include "txadapt/mlp.hpp"
#include "txadapt/rng.hpp"

namespace txadapt {

// Digamma (derivative of lgamma) via upward recurrence + asymptotic series.
double digamma(double x);

// Numerically safe softmax over a column vector of logits.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

double log_sum_exp(const Eigen::VectorXd& logits);

enum class HeadKind : std::uint32_t { categorical = 0, beta = 1 };

// Shape parameters of one Beta dimension, kept > 1 so the density is unimodal
// with no mass spikes at the support edges.
struct BetaShape {
    double a = 1.0;
    double b = 1.0;
};

// raw -> shape: 1 + 1e-6 + softplus(raw).
BetaShape beta_shape_from_raw(double raw_a, double raw_b);

double beta_log_pdf(double z, const BetaShape& s);

// d log pdf / d (raw_a, raw_b) at fixed z, chained through the softplus map.
void beta_log_pdf_grad_raw(double z, const BetaShape& s, double raw_a, double raw_b,
                           double& d_raw_a, double& d_raw_b);

double sample_beta(const BetaShape& s, Rng& rng);

// Actor + critic pair with a distribution head.
// Categorical: actor outputs one logit per discrete action.
// Beta: actor outputs (raw_a, raw_b) per action dimension (2 dims: rate, power);
// samples live in (0,1) and are scaled by the environment's action space.
struct PolicyNet {
    Mlp actor;
    Mlp critic;
    HeadKind head = HeadKind::categorical;
    int action_dims = 1;  // categorical: action count; beta: continuous dims

    static PolicyNet make_categorical(int obs_dims, int action_count, Rng& rng);
    static PolicyNet make_beta(int obs_dims, int action_dims, Rng& rng);
};

struct CategoricalSample {
    int action = 0;
    double log_prob = 0.0;
};

CategoricalSample sample_categorical(const Eigen::VectorXd& logits, Rng& rng);
double categorical_log_prob(const Eigen::VectorXd& logits, int action);
double categorical_entropy(const Eigen::VectorXd& logits);

struct BetaSampleResult {
    Eigen::VectorXd unit;  // one (0,1) coordinate per dimension
    double log_prob = 0.0;  // joint, in unit coordinates
};

BetaSampleResult sample_beta_policy(const Eigen::VectorXd& raw, Rng& rng);
double beta_policy_log_prob(const Eigen::VectorXd& raw, const Eigen::VectorXd& unit);

// Versioned binary checkpoint: header, layer shape manifest, then all
// parameters as little-endian 64-bit floats (actor first, critic second).
void save_checkpoint(const std::filesystem::path& path, const PolicyNet& net);
PolicyNet load_checkpoint(const std::filesystem::path& path);

}  // namespace txadapt
