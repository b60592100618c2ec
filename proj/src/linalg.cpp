#include "ssmid/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace ssmid {

Eigen::LLT<Mat> jittered_llt(const Mat& p, double jitter_scale, int max_tries) {
    const Eigen::Index n = p.rows();
    const double tr = p.trace();
    const double base = tr > 0.0 ? tr / static_cast<double>(n) : 1.0;
    double jitter = 0.0;
    for (int attempt = 0; attempt < max_tries; ++attempt) {
        Mat candidate = symmetrize(p);
        if (jitter > 0.0) candidate += jitter * Mat::Identity(n, n);
        Eigen::LLT<Mat> llt(candidate);
        if (llt.info() == Eigen::Success) return llt;
        jitter = (jitter == 0.0) ? base * jitter_scale : jitter * 8.0;
    }
    throw DegeneracyError("covariance not positive definite after jitter escalation");
}

Mat psd_sqrt(const Mat& p) {
    if (p.isZero(0.0)) return Mat::Zero(p.rows(), p.cols());
    Eigen::LLT<Mat> llt(symmetrize(p));
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(p));
    if (es.info() != Eigen::Success)
        throw DegeneracyError("psd_sqrt: eigendecomposition failed");
    Vec lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

double log_mvn_pdf(const Vec& x, const Vec& mean, const Eigen::LLT<Mat>& llt_of_cov) {
    const Eigen::Index d = x.size();
    const Vec resid = x - mean;
    // Solve L y = r; quadratic form is |y|^2, log det from diag(L).
    const Vec y = llt_of_cov.matrixL().solve(resid);
    double log_det = 0.0;
    const auto& l = llt_of_cov.matrixLLT();
    for (Eigen::Index i = 0; i < d; ++i) log_det += std::log(l(i, i));
    log_det *= 2.0;
    constexpr double log2pi = 1.8378770664093454836;
    return -0.5 * (y.squaredNorm() + log_det + static_cast<double>(d) * log2pi);
}

double log_mvn_pdf(const Vec& x, const Vec& mean, const Mat& cov, double jitter_scale) {
    return log_mvn_pdf(x, mean, jittered_llt(cov, jitter_scale));
}

double logsumexp(std::span<const double> v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m; // all -inf (or a NaN/inf poisoned input)
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

double norm_pdf(double z) {
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

double norm_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

} // namespace ssmid
