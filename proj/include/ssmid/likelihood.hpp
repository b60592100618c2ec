#pragma once

#include <span>
#include <string>

#include "ssmid/model.hpp"
#include "ssmid/particle.hpp"

namespace ssmid {

/// Tuning for particle-filter likelihood evaluation.
struct LikelihoodConfig {
    int num_particles = 100;
    double alpha_implicit = 1e-4; // implicit-sampling scale, 0 < alpha << 1
    double ess_fraction = 0.5;    // resample when ESS < fraction * N_p
    double jitter = 1e-10;        // covariance regularization scale
    double prior_cov = 1e-6;      // isotropic covariance of the initial cloud
    double floor = -1e8;          // finite values below this are treated as infeasible

    void validate() const {
        if (num_particles < 1) throw ConfigError("likelihood: num_particles must be >= 1");
        if (!(alpha_implicit > 0.0 && alpha_implicit < 1.0))
            throw ConfigError("likelihood: alpha_implicit must be in (0, 1)");
        if (!(ess_fraction > 0.0 && ess_fraction <= 1.0))
            throw ConfigError("likelihood: ess_fraction must be in (0, 1]");
        if (!(prior_cov > 0.0)) throw ConfigError("likelihood: prior_cov must be positive");
    }
};

/// Likelihood evaluation outcome. Infeasible parameter points and filter
/// collapse yield value = -inf plus a machine-readable note instead of an
/// exception, so optimizers can treat them as ordinary worst observations.
struct LikelihoodResult {
    double value = kNegInf;
    std::string note;    // empty on clean evaluation
    long fail_time = -1; // one-based time index of the failure, when known

    bool ok() const { return note.empty(); }
};

/// Log-likelihood of `dataset` under the model at `theta` via the unscented
/// implicit particle filter: per particle, unscented prediction through the
/// dynamics, unscented measurement prediction, Kalman-type update, implicit
/// sampling around the posterior mode, and importance reweighting; the
/// per-step predictive density is the weighted Gaussian mixture over
/// particles. Deterministic given the seed.
LikelihoodResult uipf_log_likelihood(const Model& model, const Vec& theta,
                                     const Dataset& dataset, const Vec& x0,
                                     const NoiseSpec& noise, const LikelihoodConfig& cfg,
                                     const UtParams& ut, uint64_t seed);

/// Auxiliary-particle-filter estimate of the same quantity; baseline for
/// variance comparison.
LikelihoodResult apf_log_likelihood(const Model& model, const Vec& theta,
                                    const Dataset& dataset, const Vec& x0,
                                    const NoiseSpec& noise, int num_particles,
                                    uint64_t seed, double floor = -1e8);

/// Fast path for deterministic dynamics (Q = 0): simulate the trajectory and
/// sum log N(z_k; h(x_k), R). The seed is accepted for interface parity but
/// unused.
LikelihoodResult deterministic_log_likelihood(const Model& model, const Vec& theta,
                                              const Dataset& dataset, const Vec& x0,
                                              const Mat& r, uint64_t seed,
                                              double floor = -1e8);

enum class LikelihoodMethod { Uipf, Apf, Deterministic };

LikelihoodMethod likelihood_method_from_string(const std::string& s);
std::string to_string(LikelihoodMethod m);

/// A dataset together with the initial state the filter's prior is centered
/// on (e.g. the rest state at that dataset's ambient temperature).
struct DatasetBinding {
    Dataset data;
    Vec x0;
};

/// Sum of per-dataset log-likelihoods. Per-dataset seeds are derived from
/// (seed, dataset index); -inf in any term makes the total -inf. Datasets
/// are evaluated concurrently when `parallel` is set (results are summed in
/// dataset order, so the value does not depend on scheduling).
LikelihoodResult total_log_likelihood(const Model& model, const Vec& theta,
                                      std::span<const DatasetBinding> datasets,
                                      const NoiseSpec& noise, const LikelihoodConfig& cfg,
                                      const UtParams& ut, uint64_t seed,
                                      LikelihoodMethod method = LikelihoodMethod::Uipf,
                                      bool parallel = true);

/// Callable bundle binding model, datasets, noise and method; evaluates the
/// total log-likelihood at (theta, seed). This is what the optimizers see.
struct MultiDatasetLikelihood {
    Model model;
    std::vector<DatasetBinding> datasets;
    NoiseSpec noise;
    LikelihoodConfig cfg;
    UtParams ut;
    LikelihoodMethod method = LikelihoodMethod::Uipf;
    bool parallel = true;

    LikelihoodResult evaluate(const Vec& theta, uint64_t seed) const {
        return total_log_likelihood(model, theta, datasets, noise, cfg, ut, seed,
                                    method, parallel);
    }
    double operator()(const Vec& theta, uint64_t seed) const {
        return evaluate(theta, seed).value;
    }
};

} // namespace ssmid
