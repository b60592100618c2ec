#include "ssmid/ocv.hpp"

#include <algorithm>
#include <cmath>

namespace ssmid {

OcvCurve::OcvCurve(std::vector<std::pair<double, double>> knots)
    : knots_(std::move(knots)) {
    const size_t n = knots_.size();
    if (n < 2) throw ConfigError("ocv: need at least two knots");
    for (size_t i = 1; i < n; ++i) {
        if (!(knots_[i].first > knots_[i - 1].first))
            throw ConfigError("ocv: soc knots must be strictly increasing");
        if (knots_[i].second < knots_[i - 1].second)
            throw ConfigError("ocv: voltage must be non-decreasing in soc");
    }
    if (knots_.front().first > 0.0 || knots_.back().first < 1.0)
        throw ConfigError("ocv: knots must cover [0, 1]");

    // Fritsch-Carlson monotone tangents.
    std::vector<double> delta(n - 1);
    for (size_t i = 0; i + 1 < n; ++i)
        delta[i] = (knots_[i + 1].second - knots_[i].second) /
                   (knots_[i + 1].first - knots_[i].first);
    slopes_.assign(n, 0.0);
    slopes_[0] = delta[0];
    slopes_[n - 1] = delta[n - 2];
    for (size_t i = 1; i + 1 < n; ++i)
        slopes_[i] = (delta[i - 1] * delta[i] <= 0.0) ? 0.0
                                                      : 0.5 * (delta[i - 1] + delta[i]);
    for (size_t i = 0; i + 1 < n; ++i) {
        if (delta[i] == 0.0) {
            slopes_[i] = slopes_[i + 1] = 0.0;
            continue;
        }
        const double a = slopes_[i] / delta[i];
        const double b = slopes_[i + 1] / delta[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            slopes_[i] = tau * a * delta[i];
            slopes_[i + 1] = tau * b * delta[i];
        }
    }
}

double OcvCurve::operator()(double soc) const {
    const double lo = knots_.front().first, hi = knots_.back().first;
    const double s = std::clamp(soc, lo, hi);
    // locate segment by binary search
    size_t j = static_cast<size_t>(
        std::upper_bound(knots_.begin(), knots_.end(), s,
                         [](double v, const auto& k) { return v < k.first; }) -
        knots_.begin());
    if (j == 0) j = 1;
    if (j >= knots_.size()) j = knots_.size() - 1;
    const auto& [x0, y0] = knots_[j - 1];
    const auto& [x1, y1] = knots_[j];
    const double h = x1 - x0;
    const double t = (s - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y0 + h10 * h * slopes_[j - 1] + h01 * y1 + h11 * h * slopes_[j];
}

OcvCurve OcvCurve::synthetic_default() {
    return OcvCurve({{0.00, 2.50},
                     {0.05, 3.00},
                     {0.10, 3.20},
                     {0.20, 3.42},
                     {0.30, 3.52},
                     {0.40, 3.58},
                     {0.50, 3.64},
                     {0.60, 3.70},
                     {0.70, 3.78},
                     {0.80, 3.88},
                     {0.90, 4.02},
                     {1.00, 4.20}});
}

} // namespace ssmid
