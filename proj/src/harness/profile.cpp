#include "ssmid/harness/profile.hpp"

#include <cmath>

#include "ssmid/rng.hpp"

namespace ssmid::harness {

Mat generate_profile(const ProfileSpec& spec, double capacity_ah) {
    spec.validate();
    if (!(capacity_ah > 0.0))
        throw ConfigError("profile: cell capacity (Ah) must be configured for c-rate scaling");

    const long steps = std::lround(spec.duration_s / spec.dt);
    if (steps < 1) throw ConfigError("profile: duration shorter than one step");
    Mat out(steps, 2);
    out.col(1).setConstant(spec.ambient_k);

    if (spec.kind == "constant_crate") {
        out.col(0).setConstant(-spec.c_rate * capacity_ah);
        return out;
    }

    // random_walk: reflected Gaussian walk on the c-rate, smoothed with a
    // ~20 s exponential window, always discharging.
    Rng rng(spec.seed);
    const double lo = spec.c_rate_min, hi = spec.c_rate_max;
    const double span = std::max(hi - lo, 1e-9);
    const double step_sd = 0.25 * span * std::sqrt(spec.dt / 10.0);
    const double lambda = std::min(1.0, spec.dt / 20.0);

    double raw = lo + span * rng.uniform();
    double smooth = raw;
    for (long k = 0; k < steps; ++k) {
        raw += step_sd * rng.normal();
        // reflect into [lo, hi]
        while (raw < lo || raw > hi) {
            if (raw < lo) raw = 2.0 * lo - raw;
            if (raw > hi) raw = 2.0 * hi - raw;
        }
        smooth += lambda * (raw - smooth);
        const double c = std::clamp(smooth, lo, hi);
        out(k, 0) = -c * capacity_ah;
    }
    return out;
}

} // namespace ssmid::harness
