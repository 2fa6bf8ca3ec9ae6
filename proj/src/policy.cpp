#include "txadapt/policy.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "txadapt/errors.hpp"

namespace txadapt {

double digamma(double x) {
    if (!(x > 0.0)) throw ConfigError("digamma defined here only for positive arguments");
    double result = 0.0;
    // Recurrence psi(x) = psi(x+1) - 1/x until the asymptotic series is accurate.
    while (x < 10.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    // Asymptotic expansion with Bernoulli terms through x^-10; the first
    // omitted term is below 3e-14 relative once x >= 10.
    double inv = 1.0 / x;
    double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 -
                      inv2 * (1.0 / 120.0 -
                              inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    return result;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    double m = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - m).exp();
    return e / e.sum();
}

double log_sum_exp(const Eigen::VectorXd& logits) {
    double m = logits.maxCoeff();
    return m + std::log((logits.array() - m).exp().sum());
}

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr double kShapeFloor = 1.0 + 1e-6;

}  // namespace

BetaShape beta_shape_from_raw(double raw_a, double raw_b) {
    return {kShapeFloor + softplus(raw_a), kShapeFloor + softplus(raw_b)};
}

double beta_log_pdf(double z, const BetaShape& s) {
    if (!(z > 0.0) || !(z < 1.0)) throw ConfigError("Beta sample outside (0, 1)");
    double log_norm = std::lgamma(s.a + s.b) - std::lgamma(s.a) - std::lgamma(s.b);
    return log_norm + (s.a - 1.0) * std::log(z) + (s.b - 1.0) * std::log1p(-z);
}

void beta_log_pdf_grad_raw(double z, const BetaShape& s, double raw_a, double raw_b,
                           double& d_raw_a, double& d_raw_b) {
    double common = digamma(s.a + s.b);
    double d_a = std::log(z) - digamma(s.a) + common;
    double d_b = std::log1p(-z) - digamma(s.b) + common;
    d_raw_a = d_a * sigmoid(raw_a);
    d_raw_b = d_b * sigmoid(raw_b);
}

double sample_beta(const BetaShape& s, Rng& rng) {
    double z = rng.beta(s.a, s.b);
    // Shapes are > 1, so the density vanishes at the edges; nudge any draw
    // that rounded onto them back inside the open interval.
    const double eps = 1e-12;
    return std::min(std::max(z, eps), 1.0 - eps);
}

PolicyNet PolicyNet::make_categorical(int obs_dims, int action_count, Rng& rng) {
    PolicyNet net;
    net.head = HeadKind::categorical;
    net.action_dims = action_count;
    net.actor = Mlp::make(obs_dims, {128, 128}, action_count, rng, 1e-2);
    net.critic = Mlp::make(obs_dims, {128, 128}, 1, rng, 1e-2);
    return net;
}

PolicyNet PolicyNet::make_beta(int obs_dims, int action_dims, Rng& rng) {
    PolicyNet net;
    net.head = HeadKind::beta;
    net.action_dims = action_dims;
    net.actor = Mlp::make(obs_dims, {128, 128}, 2 * action_dims, rng, 1e-2);
    net.critic = Mlp::make(obs_dims, {128, 128}, 1, rng, 1e-2);
    return net;
}

CategoricalSample sample_categorical(const Eigen::VectorXd& logits, Rng& rng) {
    Eigen::VectorXd probs = softmax(logits);
    double u = rng.uniform01();
    double acc = 0.0;
    int action = static_cast<int>(probs.size()) - 1;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        acc += probs(i);
        if (u < acc) {
            action = static_cast<int>(i);
            break;
        }
    }
    return {action, categorical_log_prob(logits, action)};
}

double categorical_log_prob(const Eigen::VectorXd& logits, int action) {
    if (action < 0 || action >= logits.size()) throw ConfigError("action outside logit range");
    return logits(action) - log_sum_exp(logits);
}

double categorical_entropy(const Eigen::VectorXd& logits) {
    Eigen::VectorXd probs = softmax(logits);
    double h = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        if (probs(i) > 0.0) h -= probs(i) * std::log(probs(i));
    }
    return h;
}

BetaSampleResult sample_beta_policy(const Eigen::VectorXd& raw, Rng& rng) {
    if (raw.size() % 2 != 0) throw ConfigError("Beta head needs raw pairs");
    BetaSampleResult res;
    res.unit.resize(raw.size() / 2);
    for (Eigen::Index d = 0; d < res.unit.size(); ++d) {
        BetaShape s = beta_shape_from_raw(raw(2 * d), raw(2 * d + 1));
        res.unit(d) = sample_beta(s, rng);
        res.log_prob += beta_log_pdf(res.unit(d), s);
    }
    return res;
}

double beta_policy_log_prob(const Eigen::VectorXd& raw, const Eigen::VectorXd& unit) {
    if (raw.size() != 2 * unit.size()) throw ConfigError("Beta raw/action size mismatch");
    double lp = 0.0;
    for (Eigen::Index d = 0; d < unit.size(); ++d) {
        BetaShape s = beta_shape_from_raw(raw(2 * d), raw(2 * d + 1));
        lp += beta_log_pdf(unit(d), s);
    }
    return lp;
}

namespace {

constexpr char kMagic[8] = {'T', 'X', 'P', 'O', 'L', '0', '0', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    return v;
}

void put_f64_block(std::ofstream& out, const std::vector<double>& vals) {
    static_assert(sizeof(double) == 8);
    for (double v : vals) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
        out.write(reinterpret_cast<const char*>(buf), 8);
    }
}

std::vector<double> get_f64_block(std::ifstream& in, std::size_t count) {
    std::vector<double> vals(count);
    for (auto& v : vals) {
        unsigned char buf[8];
        in.read(reinterpret_cast<char*>(buf), 8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        std::memcpy(&v, &bits, 8);
    }
    return vals;
}

void put_shape(std::ofstream& out, const std::vector<int>& shape) {
    put_u32(out, static_cast<std::uint32_t>(shape.size()));
    for (int s : shape) put_u32(out, static_cast<std::uint32_t>(s));
}

std::vector<int> get_shape(std::ifstream& in) {
    std::uint32_t n = get_u32(in);
    if (n > 64) throw FileFormatError("implausible layer manifest");
    std::vector<int> shape(n);
    for (auto& s : shape) s = static_cast<int>(get_u32(in));
    return shape;
}

Mlp rebuild(const std::vector<int>& shape) {
    if (shape.size() < 2) throw FileFormatError("layer manifest too short");
    Rng throwaway(0);
    std::vector<int> hidden(shape.begin() + 1, shape.end() - 1);
    return Mlp::make(shape.front(), hidden, shape.back(), throwaway, 1.0);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const PolicyNet& net) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileFormatError("cannot open checkpoint for writing: " + path.string());
    out.write(kMagic, 8);
    put_u32(out, static_cast<std::uint32_t>(net.head));
    put_u32(out, static_cast<std::uint32_t>(net.action_dims));
    put_shape(out, net.actor.shape());
    put_shape(out, net.critic.shape());
    std::vector<double> flat;
    net.actor.flatten(flat);
    put_u32(out, static_cast<std::uint32_t>(flat.size()));
    put_f64_block(out, flat);
    net.critic.flatten(flat);
    put_u32(out, static_cast<std::uint32_t>(flat.size()));
    put_f64_block(out, flat);
    if (!out) throw FileFormatError("checkpoint write failure: " + path.string());
}

PolicyNet load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileFormatError("cannot open checkpoint: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw FileFormatError("not a policy checkpoint: " + path.string());
    PolicyNet net;
    std::uint32_t head = get_u32(in);
    if (head > 1) throw FileFormatError("unknown head kind in " + path.string());
    net.head = static_cast<HeadKind>(head);
    net.action_dims = static_cast<int>(get_u32(in));
    auto actor_shape = get_shape(in);
    auto critic_shape = get_shape(in);
    net.actor = rebuild(actor_shape);
    net.critic = rebuild(critic_shape);
    std::uint32_t actor_n = get_u32(in);
    if (actor_n != net.actor.parameter_count())
        throw FileFormatError("actor parameter count mismatch in " + path.string());
    net.actor.unflatten(get_f64_block(in, actor_n));
    std::uint32_t critic_n = get_u32(in);
    if (critic_n != net.critic.parameter_count())
        throw FileFormatError("critic parameter count mismatch in " + path.string());
    net.critic.unflatten(get_f64_block(in, critic_n));
    if (!in) throw FileFormatError("truncated checkpoint: " + path.string());
    return net;
}

}  // namespace txadapt
