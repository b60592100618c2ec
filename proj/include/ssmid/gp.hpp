#pragma once

#include <optional>
#include <vector>

#include "ssmid/linalg.hpp"
#include "ssmid/rng.hpp"
#include "ssmid/types.hpp"

namespace ssmid {

enum class KernelFamily { SquaredExponential, Matern52 };

KernelFamily kernel_family_from_string(const std::string& s);
std::string to_string(KernelFamily f);

/// Stationary kernel with per-dimension lengthscales (automatic relevance
/// determination). Coordinates are expected in the normalized unit cube.
struct KernelSpec {
    KernelFamily family = KernelFamily::Matern52;
    double signal_var = 1.0;
    Vec lengthscales;       // one per input dimension
    double noise_var = 1e-4;

    void validate() const {
        if (!(signal_var > 0.0)) throw ConfigError("kernel: signal variance must be > 0");
        if ((lengthscales.array() <= 0.0).any())
            throw ConfigError("kernel: lengthscales must be > 0");
        if (!(noise_var >= 0.0)) throw ConfigError("kernel: noise variance must be >= 0");
    }
};

double kernel_eval(const KernelSpec& k, const Vec& a, const Vec& b);

/// The shared set of evaluated points {(theta_i, L_i)}. Stores physical
/// coordinates; -inf entries are kept (the scheduler needs to remember
/// failed regions) but never participate in "best" or ranks.
class ObservationPool {
public:
    struct Obs {
        Vec theta;
        double value;
    };

    void add(Vec theta, double value) { obs_.push_back({std::move(theta), value}); }

    size_t size() const { return obs_.size(); }
    const Obs& operator[](size_t i) const { return obs_[i]; }
    const std::vector<Obs>& observations() const { return obs_; }

    size_t finite_count() const;
    /// Largest finite value; -inf when the pool has no finite entry.
    double best_value() const;
    /// Index of the best finite value (first of ties); nullopt when none.
    std::optional<size_t> best_index() const;
    /// 1 + number of finite entries strictly greater than `value`
    /// (1 = best). -inf values never rank.
    int rank_of_value(double value) const;
    /// Number of finite entries >= value; a candidate enters the top m
    /// strictly when this count is < m. -inf never qualifies.
    int count_ge(double value) const;
    /// Indices of the k best finite observations, best first (stable ties).
    std::vector<size_t> top_indices(size_t k) const;

private:
    std::vector<Obs> obs_;
};

struct GpTrainConfig {
    int n_starts = 3;              // multi-start count for hyperparameter search
    long max_evals_per_start = 150;
    double noise_floor = 1e-8;     // minimum observation-noise variance
    int hyper_subsample = 160;     // cap on points used inside the LML search
    double lengthscale_min = 5e-3;
    double lengthscale_max = 10.0;
    double signal_min = 1e-6;
    double signal_max = 1e3;
    double noise_max = 1.0;
};

/// Gaussian-process regression of pool values over the normalized parameter
/// cube: constant prior mean (the mean of the finite targets), trained
/// kernel hyperparameters, Cholesky-factorized conditioning. Immutable after
/// fit; posterior evaluation is thread-safe.
class GpModel {
public:
    /// Fit on the pool's finite observations (at least 2 required).
    /// Hyperparameters maximize the log marginal likelihood by multi-start
    /// bounded Nelder-Mead over log-hyperparameters; `warm`, when given,
    /// seeds the first start. Deterministic given the seed.
    static GpModel fit(const ObservationPool& pool, const ParameterSpace& space,
                       KernelFamily family, const GpTrainConfig& cfg, uint64_t seed,
                       const KernelSpec* warm = nullptr);

    /// Condition on the pool with fixed, already-trained hyperparameters.
    static GpModel condition(const ObservationPool& pool, const ParameterSpace& space,
                             const KernelSpec& kernel);

    struct Posterior {
        double mean;
        double sd; // >= 0
    };

    /// Posterior at a normalized (unit-cube) point, de-standardized to the
    /// target scale.
    Posterior posterior(const Vec& u) const;

    const KernelSpec& kernel() const { return kernel_; }
    Eigen::Index training_size() const { return x_.rows(); }

    /// Log marginal likelihood of standardized targets under a kernel;
    /// exposed for training and tests.
    static double log_marginal_likelihood(const Mat& x, const Vec& y,
                                          const KernelSpec& kernel);

private:
    KernelSpec kernel_;
    Mat x_;          // q x d normalized training inputs
    Vec alpha_;      // (K + noise I)^{-1} y_standardized
    Eigen::LLT<Mat> llt_;
    double y_mean_ = 0.0;
    double y_sd_ = 1.0;
};

} // namespace ssmid
