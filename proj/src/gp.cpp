#include "txadapt/gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "txadapt/errors.hpp"

namespace txadapt {

void KernelParams::validate() const {
    if (!(signal_var > 0.0)) throw ConfigError("kernel signal variance must be positive");
    if (!(corr_dist_m > 0.0)) throw ConfigError("kernel correlation distance must be positive");
    if (noise_var < 0.0) throw ConfigError("kernel noise variance must be non-negative");
}

double kernel_value(const Point& a, const Point& b, const KernelParams& params) {
    return params.signal_var * std::exp(-distance(a, b) / params.corr_dist_m);
}

namespace {

Eigen::MatrixXd gram_matrix(std::span<const Point> x, const KernelParams& params) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            double v = kernel_value(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)], params);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    k.diagonal().array() += params.noise_var;
    return k;
}

// Cholesky with escalating diagonal jitter. Returns the factor and the jitter
// that succeeded.
std::pair<Eigen::LLT<Eigen::MatrixXd>, double> robust_llt(Eigen::MatrixXd k) {
    const double scale = k.diagonal().mean();
    double jitter = 0.0;
    for (int attempt = 0; attempt <= 5; ++attempt) {
        Eigen::MatrixXd trial = k;
        if (attempt > 0) {
            jitter = scale * std::pow(10.0, -10.0 + (attempt - 1));
            trial.diagonal().array() += jitter;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(trial);
        if (llt.info() == Eigen::Success) return {llt, attempt == 0 ? 0.0 : jitter};
    }
    throw IllConditionedKernelError("kernel matrix not positive definite after jitter escalation");
}

}  // namespace

GpPrediction gp_predict(std::span<const Point> obs_x, const Eigen::VectorXd& obs_y,
                        std::span<const Point> query, const KernelParams& params) {
    params.validate();
    if (obs_x.empty()) throw ConfigError("GP prediction with no observations");
    if (static_cast<Eigen::Index>(obs_x.size()) != obs_y.size())
        throw ConfigError("observation point/value count mismatch");

    auto [llt, jitter] = robust_llt(gram_matrix(obs_x, params));
    Eigen::VectorXd alpha = llt.solve(obs_y);

    const auto m = static_cast<Eigen::Index>(obs_x.size());
    const auto q = static_cast<Eigen::Index>(query.size());
    Eigen::MatrixXd cross(m, q);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < q; ++j)
            cross(i, j) = kernel_value(obs_x[static_cast<std::size_t>(i)],
                                       query[static_cast<std::size_t>(j)], params);

    GpPrediction pred;
    pred.jitter_used = jitter;
    pred.mean = cross.transpose() * alpha;
    Eigen::MatrixXd w = llt.matrixL().solve(cross);
    pred.variance.resize(q);
    for (Eigen::Index j = 0; j < q; ++j) {
        double v = params.signal_var - w.col(j).squaredNorm();
        pred.variance(j) = std::max(v, 0.0);
    }
    return pred;
}

double gp_log_marginal(std::span<const Point> obs_x, const Eigen::VectorXd& obs_y,
                       const KernelParams& params) {
    params.validate();
    if (obs_x.empty()) throw ConfigError("log marginal of no observations");
    auto [llt, jitter] = robust_llt(gram_matrix(obs_x, params));
    (void)jitter;
    Eigen::VectorXd alpha = llt.solve(obs_y);
    double log_det = 0.0;
    const Eigen::MatrixXd& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
    const double n = static_cast<double>(obs_y.size());
    return -0.5 * obs_y.dot(alpha) - 0.5 * log_det - 0.5 * n * std::log(2.0 * M_PI);
}

KernelParams fit_kernel_params(std::span<const Point> obs_x, const Eigen::VectorXd& obs_y) {
    auto log_space = [](double lo, double hi, int count) {
        std::vector<double> v(static_cast<std::size_t>(count));
        double llo = std::log10(lo), lhi = std::log10(hi);
        for (int i = 0; i < count; ++i)
            v[static_cast<std::size_t>(i)] =
                std::pow(10.0, llo + (lhi - llo) * i / std::max(1, count - 1));
        return v;
    };
    const std::vector<double> signal_grid = log_space(0.1, 10.0, 5);
    const std::vector<double> dist_grid = log_space(1.0, 100.0, 7);
    const std::vector<double> noise_grid = log_space(1e-4, 1.0, 5);

    KernelParams best;
    double best_score = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (double s : signal_grid) {
        for (double d : dist_grid) {
            for (double z : noise_grid) {
                KernelParams p{s, d, z};
                double score;
                try {
                    score = gp_log_marginal(obs_x, obs_y, p);
                } catch (const IllConditionedKernelError&) {
                    continue;
                }
                if (!std::isfinite(score)) continue;
                // Strict improvement, except ties prefer larger correlation distance.
                if (!found || score > best_score ||
                    (score == best_score && d > best.corr_dist_m)) {
                    best = p;
                    best_score = score;
                    found = true;
                }
            }
        }
    }
    if (!found) throw IllConditionedKernelError("no kernel hyperparameters fit the observations");
    return best;
}

}  // namespace txadapt
