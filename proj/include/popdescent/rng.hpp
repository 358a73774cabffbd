#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace popdescent {

// SplitMix64 finalizer, used to turn arbitrary tag words into well-mixed seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// FNV-1a, for deriving stream tags from names.
constexpr std::uint64_t hash_name(std::string_view name) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

// A deterministic random stream with hierarchical derivation.
//
// `derive(tags...)` produces an independent child stream whose sequence is a
// pure function of the parent's root seed and the tag words. Derivation never
// consumes parent state, so children can be created in any order (or in
// parallel) and always see the same sequence. All sampling goes through
// mt19937_64 plus hand-rolled transforms, so results are bit-identical across
// standard library implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : root_(seed), gen_(mix64(seed)) {}

    std::uint64_t root_seed() const noexcept { return root_; }

    template <typename... Tags>
    RngStream derive(Tags... tags) const {
        std::uint64_t s = root_;
        ((s = mix64(s ^ static_cast<std::uint64_t>(tags))), ...);
        return RngStream(s);
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log() argument.
    double uniform_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Rejection sampling keeps the result exact.
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller; the second variate of each pair is cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double gaussian(double mean, double sd) { return mean + sd * gaussian(); }

    // Fisher-Yates shuffle driven by this stream (std::shuffle is
    // implementation-defined, this is not).
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices drawn from [0, n), in shuffled order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        if (k > n) throw std::invalid_argument("sample_indices: k > n");
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(uniform_below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

private:
    std::uint64_t root_;
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Well-known substream tags. Keeping these public lets tests and external
// drivers reproduce any internal draw exactly.
namespace streams {
inline constexpr std::uint64_t local_update = 0x1001;
inline constexpr std::uint64_t evolve = 0x1002;
inline constexpr std::uint64_t init_theta = 0x1003;
inline constexpr std::uint64_t init_alpha = 0x1004;
inline constexpr std::uint64_t train_batch = 0x1005;
inline constexpr std::uint64_t cv_batch = 0x1006;
inline constexpr std::uint64_t split = 0x1007;
inline constexpr std::uint64_t data = 0x1008;
inline constexpr std::uint64_t trial = 0x1009;
}  // namespace streams

}  // namespace popdescent
