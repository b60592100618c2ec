#include "ssmid/particle.hpp"

#include <cmath>

namespace ssmid {

double effective_sample_size(const std::vector<double>& weights) {
    double s2 = 0.0;
    for (double w : weights) s2 += w * w;
    if (s2 <= 0.0) return 0.0;
    return 1.0 / s2;
}

std::pair<Vec, Mat> predict_particle(const Model& model, const Particle& particle,
                                     const Vec& u, const Vec& theta, const Mat& q,
                                     const UtParams& ut, double jitter_scale) {
    auto res = unscented_transform(
        [&](const Vec& x) { return model.transition(x, u, theta); }, particle.mean,
        particle.cov, ut, jitter_scale);
    return {std::move(res.mean), symmetrize(res.cov + q)};
}

MeasPrediction predict_measurement(const Model& model, const Vec& x_pred,
                                   const Mat& p_pred, const Vec& u, const Vec& theta,
                                   const Mat& r, const UtParams& ut,
                                   double jitter_scale) {
    auto res = unscented_transform(
        [&](const Vec& x) { return model.measurement(x, u, theta); }, x_pred, p_pred,
        ut, jitter_scale);
    return {std::move(res.mean), symmetrize(res.cov + r), std::move(res.cross)};
}

std::pair<Vec, Mat> kalman_update_particle(const Vec& x_pred, const Mat& p_pred,
                                           const Vec& z_pred, const Mat& p_z,
                                           const Mat& p_xz, const Vec& z,
                                           double jitter_scale) {
    Eigen::LLT<Mat> llt = jittered_llt(p_z, jitter_scale);
    // gain K = P_xz P_z^{-1}, computed as solve(P_z, P_xz^T)^T
    const Mat gain = llt.solve(p_xz.transpose()).transpose();
    Vec x_tilde = x_pred + gain * (z - z_pred);
    Mat p_post = symmetrize(p_pred - gain * p_xz.transpose());
    return {std::move(x_tilde), std::move(p_post)};
}

Vec implicit_sample(const Vec& x_tilde, const Mat& p_post, double alpha_implicit,
                    Rng& rng, double jitter_scale) {
    const Mat l = jittered_llt(p_post, jitter_scale).matrixL();
    const Vec xi = std::sqrt(alpha_implicit) * rng.normal_vec(x_tilde.size());
    return x_tilde + l * xi;
}

Vec implicit_sample(const Vec& x_tilde, const Mat& p_post, double alpha_implicit,
                    uint64_t seed, double jitter_scale) {
    Rng rng(seed);
    return implicit_sample(x_tilde, p_post, alpha_implicit, rng, jitter_scale);
}

std::vector<double> update_weights(const std::vector<double>& prev_weights,
                                   const std::vector<double>& log_obs_likelihoods) {
    const size_t n = prev_weights.size();
    if (log_obs_likelihoods.size() != n)
        throw ConfigError("update_weights: size mismatch");
    std::vector<double> log_w(n);
    double m = kNegInf;
    for (size_t i = 0; i < n; ++i) {
        log_w[i] = (prev_weights[i] > 0.0 ? std::log(prev_weights[i]) : kNegInf) +
                   log_obs_likelihoods[i];
        m = std::max(m, log_w[i]);
    }
    if (!std::isfinite(m))
        throw DegeneracyError("filter collapse: all particle weights vanished");
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += std::exp(log_w[i] - m);
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = std::exp(log_w[i] - m) / s;
    return out;
}

double predictive_log_likelihood(const std::vector<double>& weights,
                                 const std::vector<Vec>& z_preds,
                                 const std::vector<Mat>& p_zs, const Vec& z,
                                 double jitter_scale) {
    const size_t n = weights.size();
    if (z_preds.size() != n || p_zs.size() != n)
        throw ConfigError("predictive_log_likelihood: size mismatch");
    std::vector<double> terms(n);
    for (size_t i = 0; i < n; ++i) {
        terms[i] = (weights[i] > 0.0)
                       ? std::log(weights[i]) +
                             log_mvn_pdf(z, z_preds[i], p_zs[i], jitter_scale)
                       : kNegInf;
    }
    return logsumexp(terms);
}

std::vector<size_t> systematic_resample_indices(const std::vector<double>& weights,
                                                Rng& rng) {
    const size_t n = weights.size();
    std::vector<size_t> idx(n);
    const double u0 = rng.uniform() / static_cast<double>(n);
    double cumulative = weights[0];
    size_t i = 0;
    for (size_t j = 0; j < n; ++j) {
        const double u = u0 + static_cast<double>(j) / static_cast<double>(n);
        while (u > cumulative && i + 1 < n) {
            ++i;
            cumulative += weights[i];
        }
        idx[j] = i;
    }
    return idx;
}

ParticleEnsemble resample(ParticleEnsemble ensemble, double ess_fraction, Rng& rng) {
    const size_t n = ensemble.size();
    if (n == 0) return ensemble;
    std::vector<double> w(n);
    for (size_t i = 0; i < n; ++i) w[i] = ensemble.particles[i].weight;
    if (effective_sample_size(w) >= ess_fraction * static_cast<double>(n))
        return ensemble;

    const auto idx = systematic_resample_indices(w, rng);
    std::vector<Particle> next(n);
    const double uniform = 1.0 / static_cast<double>(n);
    for (size_t j = 0; j < n; ++j) {
        next[j] = ensemble.particles[idx[j]];
        next[j].weight = uniform;
    }
    ensemble.particles = std::move(next);
    return ensemble;
}

ParticleEnsemble resample(ParticleEnsemble ensemble, double ess_fraction, uint64_t seed) {
    Rng rng(seed);
    return resample(std::move(ensemble), ess_fraction, rng);
}

} // namespace ssmid
