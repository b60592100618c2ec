#pragma once

#include "ssmid/linalg.hpp"
#include "ssmid/types.hpp"

namespace ssmid {

/// Scaled unscented transform parameters.
struct UtParams {
    double alpha = 1e-3;
    double beta = 2.0;
    double kappa = 0.0;

    void validate() const {
        if (!(alpha > 0.0) || alpha > 1.0)
            throw ConfigError("unscented: alpha must be in (0, 1]");
    }
};

struct UtResult {
    Vec mean;   // E[g(x)]
    Mat cov;    // Cov[g(x)], symmetrized
    Mat cross;  // Cov[x, g(x)], n_in x n_out
};

/// Propagate N(mean, cov) through `g` with 2n+1 scaled sigma points.
/// Exact for affine g. Throws DegeneracyError when cov cannot be
/// factorized even with jitter.
template <typename G>
UtResult unscented_transform(G&& g, const Vec& mean, const Mat& cov,
                             const UtParams& ut, double jitter_scale = 1e-10) {
    ut.validate();
    const Eigen::Index n = mean.size();
    const double lambda = ut.alpha * ut.alpha * (static_cast<double>(n) + ut.kappa) -
                          static_cast<double>(n);
    const double c = static_cast<double>(n) + lambda;

    const Mat l = jittered_llt(cov, jitter_scale).matrixL();
    const Mat scaled = std::sqrt(c) * l;

    const Vec y0 = g(mean);
    const Eigen::Index m = y0.size();

    const double w_mean0 = lambda / c;
    const double w_cov0 = lambda / c + (1.0 - ut.alpha * ut.alpha + ut.beta);
    const double w_i = 1.0 / (2.0 * c);

    Mat xs(n, 2 * n);
    Mat ys(m, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        xs.col(2 * i) = mean + scaled.col(i);
        xs.col(2 * i + 1) = mean - scaled.col(i);
        ys.col(2 * i) = g(xs.col(2 * i));
        ys.col(2 * i + 1) = g(xs.col(2 * i + 1));
    }

    UtResult out;
    // Weights sum to one, so the mean can be accumulated as deviations from
    // the center point; this avoids the catastrophic cancellation the huge
    // negative center weight would otherwise cause at small alpha.
    (void)w_mean0;
    out.mean = y0;
    for (Eigen::Index j = 0; j < 2 * n; ++j) out.mean += w_i * (ys.col(j) - y0);

    out.cov = w_cov0 * (y0 - out.mean) * (y0 - out.mean).transpose();
    out.cross = Mat::Zero(n, m); // center term vanishes (x-deviation is zero)
    for (Eigen::Index j = 0; j < 2 * n; ++j) {
        const Vec dy = ys.col(j) - out.mean;
        out.cov += w_i * dy * dy.transpose();
        out.cross += w_i * (xs.col(j) - mean) * dy.transpose();
    }
    out.cov = symmetrize(out.cov);
    return out;
}

} // namespace ssmid
