#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "txadapt/rng.hpp"

namespace txadapt {

// Fully connected network: tanh on every hidden layer, linear output.
// Forward and backward run batched (one column per sample) so updates are
// dense matrix products.
class Mlp {
public:
    struct Layer {
        Eigen::MatrixXd w;  // out x in
        Eigen::VectorXd b;
    };

    Mlp() = default;

    // Orthogonal-style init: QR of a Gaussian matrix, output layer scaled down
    // so the initial policy is near uniform.
    static Mlp make(int inputs, const std::vector<int>& hidden, int outputs, Rng& rng,
                    double output_scale = 1e-2);

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

    struct BatchCache {
        std::vector<Eigen::MatrixXd> activations;  // [0] = input, then post-activation
    };

    // X is (inputs x batch); returns (outputs x batch).
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x, BatchCache* cache = nullptr) const;

    struct Grad {
        std::vector<Layer> layers;

        void zero();
        void add_scaled(const Grad& other, double scale);
        bool finite() const;
    };

    Grad make_grad() const;

    // dLoss/dOutput is (outputs x batch); accumulates into grad.
    void backward_batch(const BatchCache& cache, const Eigen::MatrixXd& d_output,
                        Grad& grad) const;

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }

    std::size_t parameter_count() const;
    void flatten(std::vector<double>& out) const;
    void unflatten(std::span<const double> flat);
    std::vector<int> shape() const;  // inputs, hidden..., outputs

private:
    std::vector<Layer> layers_;
};

// Adam optimizer state for one network.
class Adam {
public:
    Adam() = default;
    Adam(const Mlp& net, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    // Descends: params -= lr * mhat / (sqrt(vhat) + eps).
    void step(Mlp& net, const Mlp::Grad& grad);

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }

private:
    double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    std::int64_t t_ = 0;
    std::vector<Mlp::Layer> m_, v_;
};

}  // namespace txadapt
