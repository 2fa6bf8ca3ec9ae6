#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace txadapt {

// SplitMix64 step; used to derive well-separated child seeds from one base seed.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic child seed from (base seed, stage tag, unit index).
// Stable per-unit streams make results independent of thread count and
// of the order units are processed in.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t unit = 0);

// Deterministic random stream. The engine is std::mt19937_64 (its sequence is
// pinned by the standard); every distribution transform is implemented here so
// that sampled values are identical across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer on [0, n). n must be >= 1.
    std::uint64_t uniform_index(std::uint64_t n);

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double normal();

    double exponential(double mean) { return -mean * std::log(1.0 - uniform01()); }

    // Poisson sample; Knuth's product method below mean 10, PTRS above.
    std::int64_t poisson(double mean);

    // Gamma(shape, 1) via Marsaglia-Tsang squeeze; boosting handles shape < 1.
    double gamma(double shape);

    double beta(double a, double b);

    // Fisher-Yates shuffle of [0, n) index vector.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

}  // namespace txadapt
