#pragma once

#include <functional>

#include "ssmid/types.hpp"

namespace ssmid {

/// Discrete-time nonlinear state-space model:
///   x_{k+1} = transition(x_k, u_k, theta) + w_k
///   z_k     = measurement(x_k, u_k, theta) + v_k
/// Both maps are deterministic and pure; noise is added by the caller.
/// Safe to evaluate concurrently from multiple threads.
struct Model {
    int state_dim = 0;
    int input_dim = 0;
    int meas_dim = 0;
    std::function<Vec(const Vec& x, const Vec& u, const Vec& theta)> transition;
    std::function<Vec(const Vec& x, const Vec& u, const Vec& theta)> measurement;

    void validate() const {
        if (state_dim <= 0 || input_dim <= 0 || meas_dim <= 0)
            throw ConfigError("model: dimensions must be positive");
        if (!transition || !measurement)
            throw ConfigError("model: transition/measurement not set");
    }
};

} // namespace ssmid
