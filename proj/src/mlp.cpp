#include "txadapt/mlp.hpp"

#include <Eigen/QR>
#include <cmath>

#include "txadapt/errors.hpp"

namespace txadapt {

namespace {

Eigen::MatrixXd orthogonal_init(int rows, int cols, Rng& rng, double scale) {
    // QR of a Gaussian draw; Q's columns are orthonormal. Sign-normalize R's
    // diagonal so the distribution is not biased by the factorization.
    int big = std::max(rows, cols);
    int small = std::min(rows, cols);
    Eigen::MatrixXd a(big, small);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
    Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < small; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    Eigen::MatrixXd w = rows >= cols ? q : Eigen::MatrixXd(q.transpose());
    return scale * w;
}

}  // namespace

Mlp Mlp::make(int inputs, const std::vector<int>& hidden, int outputs, Rng& rng,
              double output_scale) {
    if (inputs < 1 || outputs < 1) throw ConfigError("network needs >= 1 input and output");
    Mlp net;
    int in = inputs;
    for (int h : hidden) {
        if (h < 1) throw ConfigError("hidden width must be >= 1");
        Layer layer;
        layer.w = orthogonal_init(h, in, rng, 1.0);
        layer.b = Eigen::VectorXd::Zero(h);
        net.layers_.push_back(std::move(layer));
        in = h;
    }
    Layer out;
    out.w = orthogonal_init(outputs, in, rng, output_scale);
    out.b = Eigen::VectorXd::Zero(outputs);
    net.layers_.push_back(std::move(out));
    return net;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
    Eigen::VectorXd a = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        a = (layers_[i].w * a + layers_[i].b).eval();
        if (i + 1 < layers_.size()) a = a.array().tanh().matrix();
    }
    return a;
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x, BatchCache* cache) const {
    if (cache) {
        cache->activations.clear();
        cache->activations.reserve(layers_.size() + 1);
        cache->activations.push_back(x);
    }
    Eigen::MatrixXd a = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Eigen::MatrixXd z = (layers_[i].w * a).colwise() + layers_[i].b;
        if (i + 1 < layers_.size()) z = z.array().tanh().matrix();
        a = std::move(z);
        if (cache && i + 1 < layers_.size()) cache->activations.push_back(a);
    }
    return a;
}

void Mlp::Grad::zero() {
    for (auto& l : layers) {
        l.w.setZero();
        l.b.setZero();
    }
}

void Mlp::Grad::add_scaled(const Grad& other, double scale) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].w += scale * other.layers[i].w;
        layers[i].b += scale * other.layers[i].b;
    }
}

bool Mlp::Grad::finite() const {
    for (const auto& l : layers)
        if (!l.w.allFinite() || !l.b.allFinite()) return false;
    return true;
}

Mlp::Grad Mlp::make_grad() const {
    Grad g;
    g.layers.reserve(layers_.size());
    for (const auto& l : layers_) {
        Layer zero;
        zero.w = Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols());
        zero.b = Eigen::VectorXd::Zero(l.b.size());
        g.layers.push_back(std::move(zero));
    }
    return g;
}

void Mlp::backward_batch(const BatchCache& cache, const Eigen::MatrixXd& d_output,
                         Grad& grad) const {
    if (cache.activations.size() != layers_.size())
        throw ConfigError("batch cache does not match network depth");
    Eigen::MatrixXd delta = d_output;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const Eigen::MatrixXd& input_act = cache.activations[i];
        grad.layers[i].w.noalias() += delta * input_act.transpose();
        grad.layers[i].b += delta.rowwise().sum();
        if (i > 0) {
            Eigen::MatrixXd back = layers_[i].w.transpose() * delta;
            // input_act holds tanh output of layer i-1; its derivative is 1 - a^2.
            delta = back.array() * (1.0 - input_act.array().square());
        }
    }
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_)
        n += static_cast<std::size_t>(l.w.size()) + static_cast<std::size_t>(l.b.size());
    return n;
}

void Mlp::flatten(std::vector<double>& out) const {
    out.clear();
    out.reserve(parameter_count());
    for (const auto& l : layers_) {
        out.insert(out.end(), l.w.data(), l.w.data() + l.w.size());
        out.insert(out.end(), l.b.data(), l.b.data() + l.b.size());
    }
}

void Mlp::unflatten(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw ConfigError("flat parameter size mismatch");
    std::size_t off = 0;
    for (auto& l : layers_) {
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
                  flat.begin() + static_cast<std::ptrdiff_t>(off + l.w.size()), l.w.data());
        off += static_cast<std::size_t>(l.w.size());
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
                  flat.begin() + static_cast<std::ptrdiff_t>(off + l.b.size()), l.b.data());
        off += static_cast<std::size_t>(l.b.size());
    }
}

std::vector<int> Mlp::shape() const {
    std::vector<int> s;
    if (layers_.empty()) return s;
    s.push_back(static_cast<int>(layers_[0].w.cols()));
    for (const auto& l : layers_) s.push_back(static_cast<int>(l.w.rows()));
    return s;
}

Adam::Adam(const Mlp& net, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& l : net.layers()) {
        Mlp::Layer zero;
        zero.w = Eigen::MatrixXd::Zero(l.w.rows(), l.w.cols());
        zero.b = Eigen::VectorXd::Zero(l.b.size());
        m_.push_back(zero);
        v_.push_back(std::move(zero));
    }
}

void Adam::step(Mlp& net, const Mlp::Grad& grad) {
    if (m_.size() != net.layers().size()) throw ConfigError("optimizer does not match network");
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < m_.size(); ++i) {
        auto& layer = net.layers()[i];
        const auto& g = grad.layers[i];
        m_[i].w = beta1_ * m_[i].w + (1.0 - beta1_) * g.w;
        m_[i].b = beta1_ * m_[i].b + (1.0 - beta1_) * g.b;
        v_[i].w = beta2_ * v_[i].w.array().matrix() + (1.0 - beta2_) * g.w.array().square().matrix();
        v_[i].b = beta2_ * v_[i].b.array().matrix() + (1.0 - beta2_) * g.b.array().square().matrix();
        layer.w.array() -=
            lr_ * (m_[i].w.array() / bc1) / ((v_[i].w.array() / bc2).sqrt() + eps_);
        layer.b.array() -=
            lr_ * (m_[i].b.array() / bc1) / ((v_[i].b.array() / bc2).sqrt() + eps_);
    }
}

}  // namespace txadapt
