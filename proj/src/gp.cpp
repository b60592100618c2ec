#include "ssmid/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ssmid/nelder_mead.hpp"

namespace ssmid {

KernelFamily kernel_family_from_string(const std::string& s) {
    if (s == "se" || s == "squared_exponential") return KernelFamily::SquaredExponential;
    if (s == "matern52") return KernelFamily::Matern52;
    throw ConfigError("unknown kernel family '" + s + "'");
}

std::string to_string(KernelFamily f) {
    return f == KernelFamily::SquaredExponential ? "se" : "matern52";
}

double kernel_eval(const KernelSpec& k, const Vec& a, const Vec& b) {
    k.validate();
    const double r2 = ((a - b).array() / k.lengthscales.array()).square().sum();
    switch (k.family) {
        case KernelFamily::SquaredExponential:
            return k.signal_var * std::exp(-0.5 * r2);
        case KernelFamily::Matern52: {
            const double r = std::sqrt(r2);
            const double c = std::sqrt(5.0) * r;
            return k.signal_var * (1.0 + c + 5.0 * r2 / 3.0) * std::exp(-c);
        }
    }
    throw ConfigError("kernel_eval: bad family");
}

size_t ObservationPool::finite_count() const {
    size_t n = 0;
    for (const auto& o : obs_)
        if (std::isfinite(o.value)) ++n;
    return n;
}

double ObservationPool::best_value() const {
    double best = kNegInf;
    for (const auto& o : obs_)
        if (std::isfinite(o.value)) best = std::max(best, o.value);
    return best;
}

std::optional<size_t> ObservationPool::best_index() const {
    std::optional<size_t> idx;
    double best = kNegInf;
    for (size_t i = 0; i < obs_.size(); ++i)
        if (std::isfinite(obs_[i].value) && obs_[i].value > best) {
            best = obs_[i].value;
            idx = i;
        }
    return idx;
}

int ObservationPool::rank_of_value(double value) const {
    if (!std::isfinite(value)) return static_cast<int>(obs_.size()) + 1;
    int greater = 0;
    for (const auto& o : obs_)
        if (std::isfinite(o.value) && o.value > value) ++greater;
    return greater + 1;
}

int ObservationPool::count_ge(double value) const {
    if (!std::isfinite(value)) return static_cast<int>(obs_.size()) + 1;
    int n = 0;
    for (const auto& o : obs_)
        if (std::isfinite(o.value) && o.value >= value) ++n;
    return n;
}

std::vector<size_t> ObservationPool::top_indices(size_t k) const {
    std::vector<size_t> idx;
    for (size_t i = 0; i < obs_.size(); ++i)
        if (std::isfinite(obs_[i].value)) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        return obs_[a].value > obs_[b].value;
    });
    if (idx.size() > k) idx.resize(k);
    return idx;
}

// --- training ---------------------------------------------------------------

namespace {

Mat kernel_matrix(const Mat& x, const KernelSpec& k) {
    const Eigen::Index q = x.rows();
    Mat kk(q, q);
    for (Eigen::Index i = 0; i < q; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = kernel_eval(k, x.row(i).transpose(), x.row(j).transpose());
            kk(i, j) = v;
            kk(j, i) = v;
        }
    }
    return kk;
}

// hyperparameter packing: [log signal_var, log l_1..d, log noise_var]
KernelSpec unpack_hypers(const Vec& u, KernelFamily family) {
    const Eigen::Index d = u.size() - 2;
    KernelSpec k;
    k.family = family;
    k.signal_var = std::exp(u[0]);
    k.lengthscales = u.segment(1, d).array().exp();
    k.noise_var = std::exp(u[d + 1]);
    return k;
}

Vec pack_hypers(const KernelSpec& k) {
    Vec u(k.lengthscales.size() + 2);
    u[0] = std::log(k.signal_var);
    u.segment(1, k.lengthscales.size()) = k.lengthscales.array().log();
    u[k.lengthscales.size() + 1] = std::log(k.noise_var);
    return u;
}

} // namespace

double GpModel::log_marginal_likelihood(const Mat& x, const Vec& y,
                                        const KernelSpec& kernel) {
    const Eigen::Index q = x.rows();
    Mat k = kernel_matrix(x, kernel);
    k.diagonal().array() += kernel.noise_var;
    Eigen::LLT<Mat> llt(k);
    if (llt.info() != Eigen::Success) return kNegInf;
    const Vec alpha = llt.solve(y);
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < q; ++i) log_det += std::log(llt.matrixLLT()(i, i));
    constexpr double log2pi = 1.8378770664093454836;
    return -0.5 * y.dot(alpha) - log_det - 0.5 * static_cast<double>(q) * log2pi;
}

GpModel GpModel::fit(const ObservationPool& pool, const ParameterSpace& space,
                     KernelFamily family, const GpTrainConfig& cfg, uint64_t seed,
                     const KernelSpec* warm) {
    // Collect finite observations in normalized coordinates.
    std::vector<size_t> keep;
    for (size_t i = 0; i < pool.size(); ++i)
        if (std::isfinite(pool[i].value)) keep.push_back(i);
    if (keep.size() < 2)
        throw ConfigError("gp_fit: need at least 2 finite observations");

    const Eigen::Index q = static_cast<Eigen::Index>(keep.size());
    const Eigen::Index d = space.dim();
    Mat x(q, d);
    Vec y_raw(q);
    for (Eigen::Index i = 0; i < q; ++i) {
        x.row(i) = space.to_unit(pool[keep[static_cast<size_t>(i)]].theta).transpose();
        y_raw[i] = pool[keep[static_cast<size_t>(i)]].value;
    }

    GpModel gp;
    gp.y_mean_ = y_raw.mean();
    const double var = (y_raw.array() - gp.y_mean_).square().mean();
    gp.y_sd_ = var > 1e-24 ? std::sqrt(var) : 1.0; // identical targets: unit scale
    const Vec y = (y_raw.array() - gp.y_mean_) / gp.y_sd_;

    // Hyperparameter search on a capped subset (conditioning stays exact below).
    Mat xs = x;
    Vec ys = y;
    if (q > cfg.hyper_subsample) {
        Rng sub_rng(derive_seed(seed, 7));
        auto perm = sub_rng.permutation(static_cast<size_t>(q));
        xs.resize(cfg.hyper_subsample, d);
        ys.resize(cfg.hyper_subsample);
        for (int i = 0; i < cfg.hyper_subsample; ++i) {
            xs.row(i) = x.row(static_cast<Eigen::Index>(perm[static_cast<size_t>(i)]));
            ys[i] = y[static_cast<Eigen::Index>(perm[static_cast<size_t>(i)])];
        }
    }

    Box bounds;
    bounds.lower.resize(d + 2);
    bounds.upper.resize(d + 2);
    bounds.lower[0] = std::log(cfg.signal_min);
    bounds.upper[0] = std::log(cfg.signal_max);
    for (Eigen::Index i = 0; i < d; ++i) {
        bounds.lower[1 + i] = std::log(cfg.lengthscale_min);
        bounds.upper[1 + i] = std::log(cfg.lengthscale_max);
    }
    bounds.lower[d + 1] = std::log(cfg.noise_floor);
    bounds.upper[d + 1] = std::log(cfg.noise_max);

    ObjectiveFn lml = [&](const Vec& u) {
        return log_marginal_likelihood(xs, ys, unpack_hypers(u, family));
    };

    std::vector<Vec> starts;
    if (warm != nullptr && warm->lengthscales.size() == d)
        starts.push_back(bounds.clamp(pack_hypers(*warm)));
    {
        KernelSpec canonical;
        canonical.family = family;
        canonical.signal_var = 1.0;
        canonical.lengthscales = Vec::Constant(d, 0.3);
        canonical.noise_var = 1e-2;
        starts.push_back(bounds.clamp(pack_hypers(canonical)));
    }
    Rng start_rng(derive_seed(seed, 11));
    while (static_cast<int>(starts.size()) < cfg.n_starts) {
        Vec u(d + 2);
        for (Eigen::Index i = 0; i < d + 2; ++i)
            u[i] = start_rng.uniform(bounds.lower[i], bounds.upper[i]);
        starts.push_back(std::move(u));
    }

    Vec best_u = starts.front();
    double best_lml = kNegInf;
    for (const auto& s0 : starts) {
        Simplex init = make_simplex_around(s0, 0.5, lml, &bounds);
        NmStop stop;
        stop.d_lim = 1e-3;
        stop.max_no_improve = static_cast<int>(2 * (d + 3));
        stop.max_evals = cfg.max_evals_per_start;
        auto res = nm_run(lml, std::move(init), stop, &bounds);
        if (res.best.value > best_lml) {
            best_lml = res.best.value;
            best_u = res.best.x;
        }
    }

    gp.kernel_ = unpack_hypers(best_u, family);
    gp.kernel_.noise_var = std::max(gp.kernel_.noise_var, cfg.noise_floor);

    // Exact conditioning on the full training set.
    gp.x_ = std::move(x);
    Mat k = kernel_matrix(gp.x_, gp.kernel_);
    k.diagonal().array() += gp.kernel_.noise_var;
    gp.llt_ = jittered_llt(k);
    gp.alpha_ = gp.llt_.solve(y);
    return gp;
}

GpModel GpModel::condition(const ObservationPool& pool, const ParameterSpace& space,
                           const KernelSpec& kernel) {
    std::vector<size_t> keep;
    for (size_t i = 0; i < pool.size(); ++i)
        if (std::isfinite(pool[i].value)) keep.push_back(i);
    if (keep.size() < 2)
        throw ConfigError("gp condition: need at least 2 finite observations");
    const Eigen::Index q = static_cast<Eigen::Index>(keep.size());
    const Eigen::Index d = space.dim();

    GpModel gp;
    gp.kernel_ = kernel;
    gp.x_.resize(q, d);
    Vec y_raw(q);
    for (Eigen::Index i = 0; i < q; ++i) {
        gp.x_.row(i) = space.to_unit(pool[keep[static_cast<size_t>(i)]].theta).transpose();
        y_raw[i] = pool[keep[static_cast<size_t>(i)]].value;
    }
    gp.y_mean_ = y_raw.mean();
    const double var = (y_raw.array() - gp.y_mean_).square().mean();
    gp.y_sd_ = var > 1e-24 ? std::sqrt(var) : 1.0;
    const Vec y = (y_raw.array() - gp.y_mean_) / gp.y_sd_;

    Mat k = kernel_matrix(gp.x_, gp.kernel_);
    k.diagonal().array() += gp.kernel_.noise_var;
    gp.llt_ = jittered_llt(k);
    gp.alpha_ = gp.llt_.solve(y);
    return gp;
}

GpModel::Posterior GpModel::posterior(const Vec& u) const {
    const Eigen::Index q = x_.rows();
    Vec k_star(q);
    for (Eigen::Index i = 0; i < q; ++i)
        k_star[i] = kernel_eval(kernel_, u, x_.row(i).transpose());
    const double mean_std = k_star.dot(alpha_);
    const Vec v = llt_.matrixL().solve(k_star);
    const double prior_var = kernel_eval(kernel_, u, u);
    const double var_std = std::max(0.0, prior_var - v.squaredNorm());
    return {y_mean_ + y_sd_ * mean_std, y_sd_ * std::sqrt(var_std)};
}

} // namespace ssmid
