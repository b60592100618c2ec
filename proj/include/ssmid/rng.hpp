#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ssmid/types.hpp"

namespace ssmid {

/// splitmix64 finalizer; used both to warm seeds and to derive sub-streams.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic sub-stream seed for (run seed, stream index).
inline uint64_t derive_seed(uint64_t seed, uint64_t stream) {
    return mix64(seed ^ mix64(stream + 1));
}

/// Deterministic random source. All stochastic code in the library draws
/// through this class so that runs are reproducible bit-for-bit from a seed;
/// the normal generator is implemented here rather than taken from
/// std::normal_distribution, whose sequence is implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), eng_(mix64(seed)) {}

    uint64_t seed() const { return seed_; }

    /// Independent generator for sub-stream `stream` of this seed.
    Rng split(uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in {0, ..., n-1}, unbiased.
    uint64_t integer(uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::integer: n must be positive");
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do { x = eng_(); } while (x >= limit);
        return x % n;
    }

    /// Standard normal via the Marsaglia polar method (cached spare).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        has_spare_ = true;
        return u * scale;
    }

    /// Vector of iid standard normals.
    Vec normal_vec(Eigen::Index n) {
        Vec out(n);
        for (Eigen::Index i = 0; i < n; ++i) out[i] = normal();
        return out;
    }

    /// Fisher-Yates permutation of {0, ..., n-1}.
    std::vector<size_t> permutation(size_t n) {
        std::vector<size_t> p(n);
        for (size_t i = 0; i < n; ++i) p[i] = i;
        for (size_t i = n; i > 1; --i) {
            const size_t j = static_cast<size_t>(integer(i));
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

private:
    uint64_t seed_;
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace ssmid
