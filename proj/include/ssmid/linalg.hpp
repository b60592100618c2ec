#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <span>

#include "ssmid/types.hpp"

namespace ssmid {

inline Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

/// Cholesky of a symmetric matrix with trace-scaled jitter escalation.
/// Throws DegeneracyError when the factorization still fails after
/// `max_tries` jitter increases.
Eigen::LLT<Mat> jittered_llt(const Mat& p, double jitter_scale = 1e-10,
                             int max_tries = 7);

/// Symmetric PSD square root: Cholesky when possible, otherwise an
/// eigendecomposition with negative eigenvalues clamped to zero. Accepts
/// singular matrices (e.g. a zero covariance), unlike jittered_llt.
Mat psd_sqrt(const Mat& p);

/// log N(x; mean, S) with S pre-factorized.
double log_mvn_pdf(const Vec& x, const Vec& mean, const Eigen::LLT<Mat>& llt_of_cov);

/// log N(x; mean, S).
double log_mvn_pdf(const Vec& x, const Vec& mean, const Mat& cov,
                   double jitter_scale = 1e-10);

/// log(sum(exp(v))) with max subtraction; -inf for an all-(-inf) input.
double logsumexp(std::span<const double> v);

/// Standard normal pdf / cdf.
double norm_pdf(double z);
double norm_cdf(double z);

} // namespace ssmid
