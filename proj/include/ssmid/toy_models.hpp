#pragma once

#include "ssmid/model.hpp"
#include "ssmid/types.hpp"

namespace ssmid {

/// Scalar logistic-map system with input forcing, the shipped 3-parameter
/// demo model: x+ = clamp(a x (1 - x) + b u, 0, 1), z = c x.
/// theta = (a, b, c).
Model make_logistic_model();

/// Search box for the logistic model: a in [2, 3.6], b in [0, 0.5],
/// c in [0.5, 2].
ParameterSpace logistic_space();

/// Reference parameters used by the shipped demo datasets.
Vec logistic_nominal(); // (2.8, 0.25, 1.2)

} // namespace ssmid
