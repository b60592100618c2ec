#include "ssmid/sampling.hpp"

#include <cmath>

namespace ssmid {

Mat latin_hypercube(int n, int dim, Rng& rng) {
    if (n < 1 || dim < 1) throw ConfigError("latin_hypercube: n and dim must be positive");
    Mat out(n, dim);
    for (int d = 0; d < dim; ++d) {
        const auto perm = rng.permutation(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            out(i, d) = (static_cast<double>(perm[static_cast<size_t>(i)]) + rng.uniform()) /
                        static_cast<double>(n);
    }
    return out;
}

namespace {

int nth_prime(int k) {
    static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
                                 73, 79, 83, 89, 97, 101, 103, 107, 109, 113};
    if (k < 0 || k >= static_cast<int>(std::size(primes)))
        throw ConfigError("halton: dimension too large");
    return primes[k];
}

double radical_inverse(int base, long i) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

} // namespace

Mat halton_shifted(int n, int dim, Rng& rng) {
    if (n < 1 || dim < 1) throw ConfigError("halton_shifted: n and dim must be positive");
    Vec shift(dim);
    for (int d = 0; d < dim; ++d) shift[d] = rng.uniform();
    Mat out(n, dim);
    for (int d = 0; d < dim; ++d) {
        const int base = nth_prime(d);
        for (int i = 0; i < n; ++i) {
            double v = radical_inverse(base, i + 1) + shift[d];
            out(i, d) = v - std::floor(v);
        }
    }
    return out;
}

} // namespace ssmid
