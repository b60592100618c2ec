#include "ssmid/toy_models.hpp"

#include <algorithm>

namespace ssmid {

Model make_logistic_model() {
    Model m;
    m.state_dim = 1;
    m.input_dim = 1;
    m.meas_dim = 1;
    m.transition = [](const Vec& x, const Vec& u, const Vec& theta) {
        Vec next(1);
        next[0] = std::clamp(theta[0] * x[0] * (1.0 - x[0]) + theta[1] * u[0], 0.0, 1.0);
        return next;
    };
    m.measurement = [](const Vec& x, const Vec&, const Vec& theta) {
        Vec z(1);
        z[0] = theta[2] * x[0];
        return z;
    };
    return m;
}

ParameterSpace logistic_space() {
    Vec lo(3), hi(3);
    lo << 2.0, 0.0, 0.5;
    hi << 3.6, 0.5, 2.0;
    return ParameterSpace({"a", "b", "c"}, lo, hi, {"-", "-", "-"});
}

Vec logistic_nominal() {
    Vec t(3);
    t << 2.8, 0.25, 1.2;
    return t;
}

} // namespace ssmid
