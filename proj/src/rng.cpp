#include "txadapt/rng.hpp"

#include <cmath>
#include <vector>

namespace txadapt {

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t unit) {
    // FNV-1a over the tag, then two SplitMix64 mixes folding in the unit index.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t state = base ^ h;
    std::uint64_t s1 = splitmix64_next(state);
    state ^= unit * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    std::uint64_t s2 = splitmix64_next(state);
    return s1 ^ (s2 + 0x9e3779b97f4a7c15ULL);
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

std::int64_t Rng::poisson(double mean) {
    if (mean < 10.0) {
        // Knuth: count uniforms until their product drops below exp(-mean).
        double limit = std::exp(-mean);
        std::int64_t k = 0;
        double prod = uniform01();
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }
    // Hoermann's PTRS transformed rejection; exact for mean >= 10.
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        double u = uniform01() - 0.5;
        double v = uniform01();
        double us = 0.5 - std::abs(u);
        double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        double k = kf;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            -mean + k * loglam - std::lgamma(k + 1.0)) {
            return static_cast<std::int64_t>(kf);
        }
    }
}

double Rng::gamma(double shape) {
    if (shape < 1.0) {
        double u = uniform01();
        while (u <= 0.0) u = uniform01();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        double v = t * t * t;
        double u = uniform01();
        double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
}

}  // namespace txadapt
