#pragma once

#include <vector>

#include "ssmid/model.hpp"
#include "ssmid/rng.hpp"
#include "ssmid/unscented.hpp"

namespace ssmid {

/// One filter particle: a Gaussian (mean, cov) with an importance weight.
struct Particle {
    Vec mean;
    Mat cov;
    double weight = 0.0;
};

struct ParticleEnsemble {
    std::vector<Particle> particles;
    long time_index = 0;

    size_t size() const { return particles.size(); }
    double weight_sum() const {
        double s = 0.0;
        for (const auto& p : particles) s += p.weight;
        return s;
    }
};

/// Effective sample size 1 / sum(w^2) of normalized weights.
double effective_sample_size(const std::vector<double>& weights);

/// Unscented prediction through the transition map, process noise added:
/// returns (x_pred, P_pred).
std::pair<Vec, Mat> predict_particle(const Model& model, const Particle& particle,
                                     const Vec& u, const Vec& theta, const Mat& q,
                                     const UtParams& ut, double jitter_scale = 1e-10);

/// Unscented measurement prediction at (x_pred, P_pred): returns
/// (z_pred, P_z with R added, P_xz).
struct MeasPrediction {
    Vec z_pred;
    Mat p_z;
    Mat p_xz;
};
MeasPrediction predict_measurement(const Model& model, const Vec& x_pred,
                                   const Mat& p_pred, const Vec& u, const Vec& theta,
                                   const Mat& r, const UtParams& ut,
                                   double jitter_scale = 1e-10);

/// Kalman-type update of a predicted particle against measurement z:
/// x_tilde = x_pred + P_xz P_z^{-1} (z - z_pred),
/// P_post  = P_pred - P_xz P_z^{-1} P_xz^T (symmetrized).
std::pair<Vec, Mat> kalman_update_particle(const Vec& x_pred, const Mat& p_pred,
                                           const Vec& z_pred, const Mat& p_z,
                                           const Mat& p_xz, const Vec& z,
                                           double jitter_scale = 1e-10);

/// Implicit sampling: x_tilde + chol(P_post) * xi with xi ~ N(0, alpha I).
Vec implicit_sample(const Vec& x_tilde, const Mat& p_post, double alpha_implicit,
                    Rng& rng, double jitter_scale = 1e-10);
Vec implicit_sample(const Vec& x_tilde, const Mat& p_post, double alpha_implicit,
                    uint64_t seed, double jitter_scale = 1e-10);

/// Normalized posterior weights w_k^i proportional to
/// w_{k-1}^i * p(z_k | particle i), computed in log space with max
/// subtraction. Throws DegeneracyError if every product underflows.
std::vector<double> update_weights(const std::vector<double>& prev_weights,
                                   const std::vector<double>& log_obs_likelihoods);

/// log p(z_k | z_{1:k-1}) of the weighted Gaussian mixture
/// sum_i w_i N(z_k; z_pred_i, P_z_i), via log-sum-exp. Returns -inf when
/// every component vanishes.
double predictive_log_likelihood(const std::vector<double>& weights,
                                 const std::vector<Vec>& z_preds,
                                 const std::vector<Mat>& p_zs, const Vec& z,
                                 double jitter_scale = 1e-10);

/// Systematic resampling indices for normalized weights.
std::vector<size_t> systematic_resample_indices(const std::vector<double>& weights,
                                                Rng& rng);

/// Resample (mean, cov) pairs when ESS < ess_fraction * N_p; weights are
/// then reset to 1/N_p. Otherwise the ensemble is returned unchanged.
ParticleEnsemble resample(ParticleEnsemble ensemble, double ess_fraction, Rng& rng);
ParticleEnsemble resample(ParticleEnsemble ensemble, double ess_fraction, uint64_t seed);

} // namespace ssmid
