#pragma once

#include "ssmid/rng.hpp"
#include "ssmid/types.hpp"

namespace ssmid {

/// Latin hypercube sample in [0,1]^dim: each dimension holds exactly one
/// point per 1/n stratum, jittered uniformly within the stratum.
/// Rows are samples.
Mat latin_hypercube(int n, int dim, Rng& rng);

/// First `n` points of the Halton sequence (prime bases) with a random
/// shift modulo 1, giving a seeded low-discrepancy set in [0,1]^dim.
Mat halton_shifted(int n, int dim, Rng& rng);

} // namespace ssmid
