#pragma once

#include "ssmid/gp.hpp"

namespace ssmid {

/// Closed-form expected improvement over the incumbent best value:
/// E[(L_hat(theta) - l_star)^+] = (mu - l_star) Phi(z) + sd phi(z),
/// z = (mu - l_star) / sd; degenerates to max(mu - l_star, 0) at sd = 0.
/// `u` is a normalized (unit-cube) point.
double expected_improvement(const GpModel& gp, const Vec& u, double l_star);

struct AcqConfig {
    int n_starts = 32;        // quasi-random seed points
    int n_polish = 32;        // best starts refined by local search
    long polish_max_evals = 60;
    double polish_step = 0.05;
};

/// Multi-start expected-improvement maximization: a seeded low-discrepancy
/// scan of the unit cube followed by bounded Nelder-Mead polish of the best
/// starts. Deterministic given the seed. Returns the physical-coordinate
/// point (clamped to bounds).
Vec maximize_acquisition(const GpModel& gp, const ParameterSpace& space,
                         const AcqConfig& cfg, double l_star, uint64_t seed);

} // namespace ssmid
