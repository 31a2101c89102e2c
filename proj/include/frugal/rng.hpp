#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "frugal/error.hpp"

namespace frugal {

// splitmix64; used to derive independent sub-streams from a master seed so
// results never depend on call scheduling.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic RNG. Distributions are implemented by hand because the
// std::*_distribution classes are not pinned across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        return Rng(mix_seed(seed, stream));
    }

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, n)
    std::size_t index(std::size_t n) {
        if (n == 0) throw Error(ErrorKind::argument, "Rng::index: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return static_cast<std::size_t>(v % n);
    }

    // Box-Muller
    double normal(double mean = 0.0, double sd = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sd * spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(theta);
        have_spare_ = true;
        return mean + sd * radius * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[index(i)]);
        }
    }

    // m distinct indices drawn from [0, n), in draw order
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m) {
        if (m > n) throw Error(ErrorKind::argument, "sample_without_replacement: m exceeds n");
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + index(n - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace frugal
