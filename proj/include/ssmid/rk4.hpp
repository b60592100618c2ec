#pragma once

#include <cmath>

#include "ssmid/types.hpp"

namespace ssmid {

namespace detail {
inline void check_finite_derivative(const Vec& dx) {
    if (dx.allFinite()) return;
    for (Eigen::Index i = 0; i < dx.size(); ++i)
        if (!std::isfinite(dx[i]))
            throw NonFiniteError("rk4 derivative component", i);
}
} // namespace detail

/// Classical 4th-order Runge-Kutta step with zero-order-hold input.
/// `deriv` maps (x, u, theta) -> dx/dt.
template <typename F>
Vec rk4_step(F&& deriv, const Vec& x, const Vec& u, const Vec& theta, double dt) {
    if (!(dt > 0.0)) throw ConfigError("rk4_step: dt must be positive");
    const Vec k1 = deriv(x, u, theta);
    detail::check_finite_derivative(k1);
    const Vec k2 = deriv(x + 0.5 * dt * k1, u, theta);
    detail::check_finite_derivative(k2);
    const Vec k3 = deriv(x + 0.5 * dt * k2, u, theta);
    detail::check_finite_derivative(k3);
    const Vec k4 = deriv(x + dt * k3, u, theta);
    detail::check_finite_derivative(k4);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace ssmid
