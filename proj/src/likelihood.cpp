#include "ssmid/likelihood.hpp"

#include <cmath>
#include <future>

#include "ssmid/simulate.hpp"

namespace ssmid {

namespace {

LikelihoodResult infeasible(const std::string& note, long k = -1) {
    LikelihoodResult r;
    r.value = kNegInf;
    r.note = note;
    r.fail_time = k;
    return r;
}

LikelihoodResult finish(double value, double floor) {
    if (!std::isfinite(value)) return infeasible("log-likelihood non-finite");
    if (value < floor) return infeasible("below likelihood floor");
    LikelihoodResult r;
    r.value = value;
    return r;
}

} // namespace

LikelihoodResult uipf_log_likelihood(const Model& model, const Vec& theta,
                                     const Dataset& dataset, const Vec& x0,
                                     const NoiseSpec& noise, const LikelihoodConfig& cfg,
                                     const UtParams& ut, uint64_t seed) {
    cfg.validate();
    dataset.validate();
    if (!theta.allFinite()) return infeasible("non-finite parameter vector");

    const int n_p = cfg.num_particles;
    const Eigen::Index n_x = x0.size();
    Rng rng(seed);

    // Initial ensemble representing p(x_0) = N(x0, prior_cov * I). Each
    // particle is itself a Gaussian carrying the full prior covariance, so
    // every mean starts at x0; particles differentiate through the implicit
    // sampling draws.
    ParticleEnsemble ens;
    ens.particles.resize(static_cast<size_t>(n_p));
    const Mat p0 = cfg.prior_cov * Mat::Identity(n_x, n_x);
    for (auto& p : ens.particles) {
        p.mean = x0;
        p.cov = p0;
        p.weight = 1.0 / static_cast<double>(n_p);
    }

    double total = 0.0;
    std::vector<double> weights(static_cast<size_t>(n_p));
    std::vector<Vec> z_preds(static_cast<size_t>(n_p));
    std::vector<Mat> p_zs(static_cast<size_t>(n_p));
    std::vector<double> log_obs(static_cast<size_t>(n_p));

    const long t_len = dataset.length();
    for (long k = 0; k < t_len; ++k) {
        const Vec u = dataset.inputs.row(k).transpose();
        const Vec z = dataset.measurements.row(k).transpose();
        try {
            for (size_t i = 0; i < ens.particles.size(); ++i) {
                auto& particle = ens.particles[i];
                auto [x_pred, p_pred] =
                    predict_particle(model, particle, u, theta, noise.Q, ut, cfg.jitter);
                auto meas = predict_measurement(model, x_pred, p_pred, u, theta,
                                                noise.R, ut, cfg.jitter);
                weights[i] = particle.weight;
                log_obs[i] = log_mvn_pdf(z, meas.z_pred, meas.p_z, cfg.jitter);

                auto [x_tilde, p_post] = kalman_update_particle(
                    x_pred, p_pred, meas.z_pred, meas.p_z, meas.p_xz, z, cfg.jitter);
                particle.mean =
                    implicit_sample(x_tilde, p_post, cfg.alpha_implicit, rng, cfg.jitter);
                particle.cov = std::move(p_post);
                z_preds[i] = std::move(meas.z_pred);
                p_zs[i] = std::move(meas.p_z);
            }

            // Predictive mixture term (weights are still the k-1 weights).
            std::vector<double> terms(weights.size());
            for (size_t i = 0; i < weights.size(); ++i)
                terms[i] = (weights[i] > 0.0 ? std::log(weights[i]) : kNegInf) + log_obs[i];
            const double step_ll = logsumexp(terms);
            if (!std::isfinite(step_ll))
                return infeasible("predictive density vanished", k + 1);
            total += step_ll;

            const auto new_weights = update_weights(weights, log_obs);
            for (size_t i = 0; i < ens.particles.size(); ++i)
                ens.particles[i].weight = new_weights[i];
            ens = resample(std::move(ens), cfg.ess_fraction, rng);
            ens.time_index = k + 1;
        } catch (const DomainError& e) {
            return infeasible(std::string("domain error: ") + e.what(), k + 1);
        } catch (const NonFiniteError& e) {
            return infeasible(std::string("non-finite: ") + e.what(), k + 1);
        } catch (const DegeneracyError& e) {
            return infeasible(std::string("degeneracy: ") + e.what(), k + 1);
        }
    }
    return finish(total, cfg.floor);
}

LikelihoodResult apf_log_likelihood(const Model& model, const Vec& theta,
                                    const Dataset& dataset, const Vec& x0,
                                    const NoiseSpec& noise, int num_particles,
                                    uint64_t seed, double floor) {
    dataset.validate();
    if (num_particles < 1) throw ConfigError("apf: num_particles must be >= 1");
    if (!theta.allFinite()) return infeasible("non-finite parameter vector");

    const size_t n_p = static_cast<size_t>(num_particles);
    const Eigen::Index n_x = x0.size();
    Rng rng(seed);

    Mat sq;
    Eigen::LLT<Mat> r_llt;
    try {
        sq = psd_sqrt(noise.Q);
        r_llt = jittered_llt(noise.R);
    } catch (const DegeneracyError& e) {
        return infeasible(std::string("noise covariance: ") + e.what());
    }

    std::vector<Vec> particles(n_p);
    std::vector<double> weights(n_p, 1.0 / static_cast<double>(n_p));
    const double sd0 = 1e-3; // tight cloud around the known initial state
    for (auto& x : particles) x = x0 + sd0 * rng.normal_vec(n_x);

    std::vector<Vec> look_ahead(n_p);
    std::vector<double> log_first(n_p), log_second(n_p);

    double total = 0.0;
    const long t_len = dataset.length();
    for (long k = 0; k < t_len; ++k) {
        const Vec u = dataset.inputs.row(k).transpose();
        const Vec z = dataset.measurements.row(k).transpose();
        try {
            // First stage: look-ahead means and auxiliary weights.
            for (size_t i = 0; i < n_p; ++i) {
                look_ahead[i] = model.transition(particles[i], u, theta);
                if (!look_ahead[i].allFinite())
                    return infeasible("state diverged", k + 1);
                const Vec z_hat = model.measurement(look_ahead[i], u, theta);
                log_first[i] = (weights[i] > 0.0 ? std::log(weights[i]) : kNegInf) +
                               log_mvn_pdf(z, z_hat, r_llt);
            }
            const double log_p1 = logsumexp(log_first);
            if (!std::isfinite(log_p1))
                return infeasible("auxiliary weights vanished", k + 1);

            std::vector<double> aux(n_p);
            for (size_t i = 0; i < n_p; ++i) aux[i] = std::exp(log_first[i] - log_p1);
            const auto idx = systematic_resample_indices(aux, rng);

            // Second stage: propagate with process noise, correct the weights.
            std::vector<Vec> next(n_p);
            for (size_t i = 0; i < n_p; ++i) {
                const size_t j = idx[i];
                next[i] = look_ahead[j] + sq * rng.normal_vec(n_x);
                if (!next[i].allFinite()) return infeasible("state diverged", k + 1);
                const Vec z_new = model.measurement(next[i], u, theta);
                const Vec z_old = model.measurement(look_ahead[j], u, theta);
                log_second[i] =
                    log_mvn_pdf(z, z_new, r_llt) - log_mvn_pdf(z, z_old, r_llt);
            }
            const double log_p2 =
                logsumexp(log_second) - std::log(static_cast<double>(n_p));
            if (!std::isfinite(log_p2))
                return infeasible("second-stage weights vanished", k + 1);

            total += log_p1 + log_p2;
            particles = std::move(next);
            const double m = *std::max_element(log_second.begin(), log_second.end());
            double s = 0.0;
            for (size_t i = 0; i < n_p; ++i) s += std::exp(log_second[i] - m);
            for (size_t i = 0; i < n_p; ++i)
                weights[i] = std::exp(log_second[i] - m) / s;
        } catch (const DomainError& e) {
            return infeasible(std::string("domain error: ") + e.what(), k + 1);
        } catch (const NonFiniteError& e) {
            return infeasible(std::string("non-finite: ") + e.what(), k + 1);
        } catch (const DegeneracyError& e) {
            return infeasible(std::string("degeneracy: ") + e.what(), k + 1);
        }
    }
    return finish(total, floor);
}

LikelihoodResult deterministic_log_likelihood(const Model& model, const Vec& theta,
                                              const Dataset& dataset, const Vec& x0,
                                              const Mat& r, uint64_t seed,
                                              double floor) {
    (void)seed;
    dataset.validate();
    if (!theta.allFinite()) return infeasible("non-finite parameter vector");

    Eigen::LLT<Mat> r_llt;
    try {
        r_llt = jittered_llt(r);
    } catch (const DegeneracyError& e) {
        return infeasible(std::string("measurement covariance: ") + e.what());
    }

    double total = 0.0;
    Vec x = x0;
    const long t_len = dataset.length();
    for (long k = 0; k < t_len; ++k) {
        const Vec u = dataset.inputs.row(k).transpose();
        try {
            x = model.transition(x, u, theta);
            if (!x.allFinite()) return infeasible("state diverged", k + 1);
            const Vec z_hat = model.measurement(x, u, theta);
            if (!z_hat.allFinite()) return infeasible("measurement diverged", k + 1);
            total += log_mvn_pdf(dataset.measurements.row(k).transpose(), z_hat, r_llt);
        } catch (const DomainError& e) {
            return infeasible(std::string("domain error: ") + e.what(), k + 1);
        } catch (const NonFiniteError& e) {
            return infeasible(std::string("non-finite: ") + e.what(), k + 1);
        }
    }
    return finish(total, floor);
}

LikelihoodMethod likelihood_method_from_string(const std::string& s) {
    if (s == "uipf") return LikelihoodMethod::Uipf;
    if (s == "apf") return LikelihoodMethod::Apf;
    if (s == "deterministic") return LikelihoodMethod::Deterministic;
    throw ConfigError("unknown likelihood method '" + s + "'");
}

std::string to_string(LikelihoodMethod m) {
    switch (m) {
        case LikelihoodMethod::Uipf: return "uipf";
        case LikelihoodMethod::Apf: return "apf";
        case LikelihoodMethod::Deterministic: return "deterministic";
    }
    return "?";
}

LikelihoodResult total_log_likelihood(const Model& model, const Vec& theta,
                                      std::span<const DatasetBinding> datasets,
                                      const NoiseSpec& noise, const LikelihoodConfig& cfg,
                                      const UtParams& ut, uint64_t seed,
                                      LikelihoodMethod method, bool parallel) {
    if (datasets.empty()) throw ConfigError("total_log_likelihood: no datasets");

    auto eval_one = [&](size_t m) -> LikelihoodResult {
        const uint64_t ds_seed = derive_seed(seed, m);
        const auto& b = datasets[m];
        switch (method) {
            case LikelihoodMethod::Uipf:
                return uipf_log_likelihood(model, theta, b.data, b.x0, noise, cfg, ut,
                                           ds_seed);
            case LikelihoodMethod::Apf:
                return apf_log_likelihood(model, theta, b.data, b.x0, noise,
                                          cfg.num_particles, ds_seed, cfg.floor);
            case LikelihoodMethod::Deterministic:
                return deterministic_log_likelihood(model, theta, b.data, b.x0, noise.R,
                                                    ds_seed, cfg.floor);
        }
        throw ConfigError("total_log_likelihood: bad method");
    };

    std::vector<LikelihoodResult> results(datasets.size());
    if (parallel && datasets.size() > 1) {
        std::vector<std::future<LikelihoodResult>> futs;
        futs.reserve(datasets.size());
        for (size_t m = 0; m < datasets.size(); ++m)
            futs.push_back(std::async(std::launch::async, eval_one, m));
        for (size_t m = 0; m < datasets.size(); ++m) results[m] = futs[m].get();
    } else {
        for (size_t m = 0; m < datasets.size(); ++m) results[m] = eval_one(m);
    }

    LikelihoodResult out;
    out.value = 0.0;
    for (size_t m = 0; m < results.size(); ++m) {
        if (!results[m].ok()) {
            results[m].note = datasets[m].data.label + ": " + results[m].note;
            return results[m];
        }
        out.value += results[m].value;
    }
    return out;
}

} // namespace ssmid
