#pragma once

#include <utility>
#include <vector>

#include "ssmid/types.hpp"

namespace ssmid {

/// Open-circuit-voltage curve U(s) over state of charge, interpolated with a
/// monotone piecewise cubic (Fritsch-Carlson) so the fitted curve never
/// undershoots the non-decreasing knot data. Inputs are clamped to the knot
/// range.
class OcvCurve {
public:
    /// Knots as (soc, voltage) pairs; soc strictly increasing and covering
    /// [0, 1], voltage non-decreasing.
    explicit OcvCurve(std::vector<std::pair<double, double>> knots);

    double operator()(double soc) const;

    const std::vector<std::pair<double, double>>& knots() const { return knots_; }

    /// Synthetic default used by the shipped configurations: monotone from
    /// 2.5 V at soc 0 to 4.2 V at soc 1 with a Li-ion-like plateau.
    static OcvCurve synthetic_default();

private:
    std::vector<std::pair<double, double>> knots_;
    std::vector<double> slopes_; // tangent at each knot
};

} // namespace ssmid
