#pragma once

#include <optional>

#include "ssmid/model.hpp"
#include "ssmid/types.hpp"

namespace ssmid {

struct SimResult {
    Mat states;        // T x n_x, row k holds x_{k+1}
    Mat measurements;  // T x n_z, row k holds z_{k+1}
};

/// Roll the model forward from x0 under `inputs` (one row per step).
/// Without `noise` the result is fully deterministic; with it, additive
/// Gaussian process/measurement noise is drawn from the seeded generator
/// (state draw first, then measurement draw, each step).
/// Throws NonFiniteError carrying the one-based time index if the state
/// or measurement leaves the finite domain.
SimResult simulate(const Model& model, const Vec& x0, const Mat& inputs,
                   const Vec& theta, const NoiseSpec* noise, uint64_t seed);

} // namespace ssmid
