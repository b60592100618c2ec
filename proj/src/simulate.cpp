#include "ssmid/simulate.hpp"

#include "ssmid/linalg.hpp"
#include "ssmid/rng.hpp"

namespace ssmid {

SimResult simulate(const Model& model, const Vec& x0, const Mat& inputs,
                   const Vec& theta, const NoiseSpec* noise, uint64_t seed) {
    model.validate();
    if (x0.size() != model.state_dim)
        throw ConfigError("simulate: x0 dimension mismatch");
    if (inputs.cols() != model.input_dim)
        throw ConfigError("simulate: input dimension mismatch");
    if (!x0.allFinite()) throw NonFiniteError("simulate: initial state", 0);

    const Eigen::Index steps = inputs.rows();
    SimResult out;
    out.states.resize(steps, model.state_dim);
    out.measurements.resize(steps, model.meas_dim);

    Mat sq, sr;
    Rng rng(seed);
    if (noise != nullptr) {
        sq = psd_sqrt(noise->Q);
        sr = psd_sqrt(noise->R);
    }

    Vec x = x0;
    for (Eigen::Index k = 0; k < steps; ++k) {
        const Vec u = inputs.row(k).transpose();
        x = model.transition(x, u, theta);
        if (noise != nullptr) x += sq * rng.normal_vec(model.state_dim);
        if (!x.allFinite()) throw NonFiniteError("simulate: state", k + 1);

        Vec z = model.measurement(x, u, theta);
        if (noise != nullptr) z += sr * rng.normal_vec(model.meas_dim);
        if (!z.allFinite()) throw NonFiniteError("simulate: measurement", k + 1);

        out.states.row(k) = x.transpose();
        out.measurements.row(k) = z.transpose();
    }
    return out;
}

} // namespace ssmid
