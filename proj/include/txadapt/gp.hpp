#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "txadapt/geometry.hpp"

namespace txadapt {

// Exponential (Gudmundson-type) spatial kernel in the standardized quantile
// domain, plus observation noise on the diagonal.
struct KernelParams {
    double signal_var = 1.0;    // sigma_k^2
    double corr_dist_m = 10.0;  // d_c
    double noise_var = 1e-2;    // sigma_zeta^2

    void validate() const;
};

double kernel_value(const Point& a, const Point& b, const KernelParams& params);

struct GpPrediction {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;   // pointwise posterior variance
    double jitter_used = 0.0;
};

// Zero-mean GP regression from observations (obs_x, obs_y) onto query points.
// Cholesky with jitter escalation 1e-10 .. 1e-6 of the mean diagonal;
// throws IllConditionedKernelError if the factorization never succeeds.
GpPrediction gp_predict(std::span<const Point> obs_x, const Eigen::VectorXd& obs_y,
                        std::span<const Point> query, const KernelParams& params);

// Log marginal likelihood of the observations under the kernel.
double gp_log_marginal(std::span<const Point> obs_x, const Eigen::VectorXd& obs_y,
                       const KernelParams& params);

// Maximum-marginal-likelihood grid search. Ties prefer the larger correlation
// distance (smoother map), then the earlier grid entry.
KernelParams fit_kernel_params(std::span<const Point> obs_x, const Eigen::VectorXd& obs_y);

}  // namespace txadapt
