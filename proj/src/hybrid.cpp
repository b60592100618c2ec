#include "ssmid/hybrid.hpp"

#include <Eigen/QR>
#include <chrono>
#include <cmath>

#include "ssmid/sampling.hpp"

namespace ssmid {

SchedulerConfig SchedulerConfig::resolved(Eigen::Index n_theta) const {
    SchedulerConfig c = *this;
    const int n = static_cast<int>(n_theta);
    if (c.init_samples <= 0) c.init_samples = std::max(2 * (n + 1), 20);
    if (c.nm_patience <= 0) c.nm_patience = 2 * (n + 1);
    c.validate(n_theta);
    return c;
}

void SchedulerConfig::validate(Eigen::Index n_theta) const {
    const int n = static_cast<int>(n_theta);
    if (top_m < 1 || top_m > n)
        throw ConfigError("scheduler: top_m must be in [1, n_theta]");
    if (init_samples < n + 1)
        throw ConfigError("scheduler: init_samples must be >= n_theta + 1");
    if (!(d_final > 0.0)) throw ConfigError("scheduler: d_final must be positive");
    if (eval_budget < init_samples)
        throw ConfigError("scheduler: eval_budget must cover initialization");
    if (bo_stagnation < 1) throw ConfigError("scheduler: bo_stagnation must be >= 1");
    if (nm_patience < 1) throw ConfigError("scheduler: nm_patience must be >= 1");
}

std::string to_string(Phase p) {
    switch (p) {
        case Phase::Init: return "init";
        case Phase::Nm: return "nm";
        case Phase::Bo: return "bo";
        case Phase::Final: return "final";
    }
    return "?";
}

std::vector<double> RunTrace::best_so_far() const {
    std::vector<double> out;
    out.reserve(entries.size());
    double best = kNegInf;
    for (const auto& e : entries) {
        if (std::isfinite(e.value)) best = std::max(best, e.value);
        out.push_back(best);
    }
    return out;
}

std::optional<double> EvalBroker::evaluate(const Vec& theta, Phase phase) {
    if (used_ >= budget_) return std::nullopt;
    const auto t0 = std::chrono::steady_clock::now();
    const uint64_t eval_seed = derive_seed(run_seed_, static_cast<uint64_t>(used_));
    double value = fn_(theta, eval_seed);
    if (std::isnan(value)) value = kNegInf;
    ++used_;
    TraceEntry e;
    e.index = used_;
    e.theta = theta;
    e.value = value;
    e.phase = phase;
    e.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    trace_.entries.push_back(std::move(e));
    return value;
}

ObservationPool initialize_pool(const ParameterSpace& space, int d_samples,
                                EvalBroker& broker, Rng& rng) {
    if (d_samples < space.dim() + 1)
        throw ConfigError("initialize_pool: need at least n_theta + 1 samples");
    const Mat unit = latin_hypercube(d_samples, static_cast<int>(space.dim()), rng);
    ObservationPool pool;
    for (int i = 0; i < d_samples; ++i) {
        const Vec theta = space.from_unit(unit.row(i).transpose());
        const auto value = broker.evaluate(theta, Phase::Init);
        if (!value) break;
        pool.add(theta, *value);
    }
    if (pool.size() == 0 || pool.finite_count() == 0)
        throw InfeasibleSpaceError(
            "every initial sample evaluated to -inf: infeasible search space");
    return pool;
}

namespace {

bool simplex_degenerate(const std::vector<Vec>& points) {
    const Eigen::Index n = points.front().size();
    if (static_cast<Eigen::Index>(points.size()) != n + 1) return true;
    for (size_t i = 0; i < points.size(); ++i)
        for (size_t j = i + 1; j < points.size(); ++j)
            if ((points[i] - points[j]).norm() < 1e-12) return true;
    Mat edges(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        edges.col(i) = points[static_cast<size_t>(i) + 1] - points[0];
    Eigen::ColPivHouseholderQR<Mat> qr(edges);
    qr.setThreshold(1e-10);
    return qr.rank() < n;
}

} // namespace

Simplex build_nm_simplex(const ObservationPool& pool, const ParameterSpace& space,
                         int top_m, Rng& rng, const NmCoefficients& coeff) {
    const Eigen::Index n = space.dim();
    const size_t need = static_cast<size_t>(n) + 1;
    if (pool.size() < need)
        throw ConfigError("build_nm_simplex: pool smaller than n_theta + 1");

    auto vertex_from = [&](size_t idx) {
        return Vertex{space.to_unit(pool[idx].theta), pool[idx].value};
    };

    // Pool exactly the minimum size: the simplex is the whole pool.
    if (pool.size() == need) {
        std::vector<Vertex> vs;
        for (size_t i = 0; i < need; ++i) vs.push_back(vertex_from(i));
        // nudge exact duplicates apart so the simplex has volume
        for (size_t i = 0; i < vs.size(); ++i)
            for (size_t j = 0; j < i; ++j)
                if ((vs[i].x - vs[j].x).norm() < 1e-12)
                    for (Eigen::Index k = 0; k < n; ++k)
                        vs[i].x[k] = std::clamp(vs[i].x[k] + 1e-6 * rng.uniform(-1.0, 1.0),
                                                0.0, 1.0);
        return make_simplex(std::move(vs), coeff);
    }

    const auto top = pool.top_indices(static_cast<size_t>(top_m));
    // Random complement drawn from the finite remainder; -inf entries mark
    // infeasible regions and make useless simplex vertices. Fall back to the
    // full remainder only when there are not enough finite points.
    std::vector<size_t> rest;
    for (size_t i = 0; i < pool.size(); ++i)
        if (std::isfinite(pool[i].value) &&
            std::find(top.begin(), top.end(), i) == top.end())
            rest.push_back(i);
    if (top.size() + rest.size() < need) {
        rest.clear();
        for (size_t i = 0; i < pool.size(); ++i)
            if (std::find(top.begin(), top.end(), i) == top.end()) rest.push_back(i);
    }

    const size_t n_random = need - top.size();
    constexpr int kMaxRedraws = 20;
    std::vector<size_t> chosen;
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        chosen.assign(top.begin(), top.end());
        auto perm = rng.permutation(rest.size());
        for (size_t i = 0; i < n_random && i < rest.size(); ++i)
            chosen.push_back(rest[perm[i]]);
        if (chosen.size() < need) break; // not enough points; fall through to nudging
        std::vector<Vec> pts;
        for (size_t idx : chosen) pts.push_back(space.to_unit(pool[idx].theta));
        if (!simplex_degenerate(pts)) {
            std::vector<Vertex> vs;
            for (size_t idx : chosen) vs.push_back(vertex_from(idx));
            return make_simplex(std::move(vs), coeff);
        }
    }

    // Retry cap exhausted: keep the last draw and push duplicates apart.
    while (chosen.size() < need && chosen.size() < pool.size())
        chosen.push_back(chosen.size() - 1);
    std::vector<Vertex> vs;
    for (size_t idx : chosen) vs.push_back(vertex_from(idx));
    for (size_t i = 0; i < vs.size(); ++i)
        for (size_t j = 0; j < i; ++j)
            if ((vs[i].x - vs[j].x).norm() < 1e-9)
                for (Eigen::Index k = 0; k < n; ++k)
                    vs[i].x[k] =
                        std::clamp(vs[i].x[k] + 1e-6 * rng.uniform(-1.0, 1.0), 0.0, 1.0);
    return make_simplex(std::move(vs), coeff);
}

double d_lim_schedule(int round, double d0) {
    if (round < 1) throw ConfigError("d_lim_schedule: round must be >= 1");
    return d0 / std::pow(2.0, round);
}

NmPhaseInfo nm_phase(ObservationPool& pool, const ParameterSpace& space,
                     const NmCoefficients& coeff, int top_m, int round, int patience,
                     double& d0, bool rebaseline_d0, EvalBroker& broker, Rng& rng) {
    NmPhaseInfo info;
    Simplex simplex = build_nm_simplex(pool, space, top_m, rng, coeff);
    const double d_init = average_vertex_distance(simplex);
    if (round == 1 || rebaseline_d0) d0 = d_init;
    info.d0 = d0;
    info.d_lim = rebaseline_d0 ? d_init / 2.0 : d_lim_schedule(round, d0);

    const Box unit = Box::unit(space.dim());
    ObjectiveFn objective = [&](const Vec& u) {
        const auto v = broker.evaluate(space.from_unit(u), Phase::Nm);
        return v.value_or(kNegInf); // unreachable past budget: nm_run stops first
    };
    NmStop stop;
    stop.d_lim = info.d_lim;
    stop.max_no_improve = patience;
    stop.max_evals = broker.remaining();
    if (stop.max_evals <= 0) {
        info.reason = NmTermination::EvalBudget;
        return info;
    }
    auto res = nm_run(objective, std::move(simplex), stop, &unit);
    for (const auto& [u, value] : res.evaluations) pool.add(space.from_unit(u), value);
    info.reason = res.reason;
    info.evaluations = static_cast<long>(res.evaluations.size());
    return info;
}

namespace {

/// Training view for the surrogate: the full pool while it is small, the
/// best half plus the most recent half once it exceeds the cap (keeps the
/// per-iteration Cholesky cost bounded on long runs).
ObservationPool gp_training_view(const ObservationPool& pool, int cap) {
    if (cap <= 0 || static_cast<int>(pool.finite_count()) <= cap) return pool;
    const size_t half = static_cast<size_t>(cap) / 2;
    std::vector<char> take(pool.size(), 0);
    for (size_t idx : pool.top_indices(half)) take[idx] = 1;
    size_t recent = 0;
    for (size_t i = pool.size(); i-- > 0 && recent < half;) {
        if (!std::isfinite(pool[i].value) || take[i]) continue;
        take[i] = 1;
        ++recent;
    }
    ObservationPool view;
    for (size_t i = 0; i < pool.size(); ++i)
        if (take[i]) view.add(pool[i].theta, pool[i].value);
    return view;
}

GpModel fit_or_condition(const ObservationPool& pool, const ParameterSpace& space,
                         const GpConfig& cfg, GpTrainState& state, uint64_t seed) {
    ++state.fit_opportunities;
    const ObservationPool view = gp_training_view(pool, cfg.condition_cap);
    const bool refit =
        !state.hypers.has_value() ||
        static_cast<int>(pool.finite_count()) <= cfg.refit_dense_until ||
        (state.fit_opportunities % cfg.refit_interval) == 0;
    if (refit) {
        const KernelSpec* warm = state.hypers ? &*state.hypers : nullptr;
        GpModel gp = GpModel::fit(view, space, cfg.kernel, cfg.train, seed, warm);
        state.hypers = gp.kernel();
        return gp;
    }
    return GpModel::condition(view, space, *state.hypers);
}

} // namespace

BoOutcome bo_phase(ObservationPool& pool, const ParameterSpace& space,
                   const GpConfig& gp_cfg, int top_m, int stagnation_limit,
                   EvalBroker& broker, Rng& rng, GpTrainState& train_state) {
    int stagnant = 0;
    while (true) {
        if (broker.exhausted()) return BoOutcome::Stagnated;
        if (pool.finite_count() < 2) {
            // Not enough signal for a surrogate yet: probe a random point.
            Vec u(space.dim());
            for (Eigen::Index i = 0; i < space.dim(); ++i) u[i] = rng.uniform();
            const auto value = broker.evaluate(space.from_unit(u), Phase::Bo);
            if (!value) return BoOutcome::Stagnated;
            pool.add(space.from_unit(u), *value);
            continue;
        }

        const uint64_t fit_seed =
            derive_seed(broker.used() == 0 ? 1 : static_cast<uint64_t>(broker.used()), 23);
        GpModel gp = fit_or_condition(pool, space, gp_cfg, train_state, fit_seed);
        const double l_star = pool.best_value();

        Vec theta = maximize_acquisition(gp, space, gp_cfg.acq, l_star,
                                         derive_seed(static_cast<uint64_t>(broker.used()), 31));
        // Duplicate suppression: a re-proposed pool point would make the
        // conditioning matrix singular, so redraw once, then fall back to a
        // random probe.
        auto is_duplicate = [&](const Vec& t) {
            const Vec u = space.to_unit(t);
            for (size_t i = 0; i < pool.size(); ++i)
                if ((space.to_unit(pool[i].theta) - u).norm() < 1e-9) return true;
            return false;
        };
        if (is_duplicate(theta)) {
            theta = maximize_acquisition(gp, space, gp_cfg.acq, l_star,
                                         derive_seed(static_cast<uint64_t>(broker.used()), 37));
            if (is_duplicate(theta)) {
                Vec u(space.dim());
                for (Eigen::Index i = 0; i < space.dim(); ++i) u[i] = rng.uniform();
                theta = space.from_unit(u);
            }
        }

        const auto value = broker.evaluate(theta, Phase::Bo);
        if (!value) return BoOutcome::Stagnated;
        // Strictly better than the pool's m-th best value: count >= before
        // insertion, so ties never trigger the switch.
        const bool enters_top_m =
            std::isfinite(*value) && pool.count_ge(*value) < top_m;
        pool.add(theta, *value);
        if (enters_top_m) return BoOutcome::SwitchToNm;
        if (++stagnant >= stagnation_limit) return BoOutcome::Stagnated;
    }
}

void final_refinement(ObservationPool& pool, const ParameterSpace& space,
                      const NmCoefficients& coeff, double d_final, EvalBroker& broker,
                      Rng& rng) {
    if (broker.exhausted()) return;
    const size_t need = static_cast<size_t>(space.dim()) + 1;
    auto top = pool.top_indices(need);
    if (top.size() < need) {
        // pad with the most recent points when there are not enough finite ones
        for (size_t i = pool.size(); i-- > 0 && top.size() < need;)
            if (std::find(top.begin(), top.end(), i) == top.end()) top.push_back(i);
    }
    std::vector<Vertex> vs;
    for (size_t idx : top) vs.push_back({space.to_unit(pool[idx].theta), pool[idx].value});
    for (size_t i = 0; i < vs.size(); ++i)
        for (size_t j = 0; j < i; ++j)
            if ((vs[i].x - vs[j].x).norm() < 1e-12)
                for (Eigen::Index k = 0; k < space.dim(); ++k)
                    vs[i].x[k] =
                        std::clamp(vs[i].x[k] + 1e-6 * rng.uniform(-1.0, 1.0), 0.0, 1.0);
    Simplex simplex = make_simplex(std::move(vs), coeff);
    if (average_vertex_distance(simplex) < d_final) return; // already converged

    const Box unit = Box::unit(space.dim());
    ObjectiveFn objective = [&](const Vec& u) {
        const auto v = broker.evaluate(space.from_unit(u), Phase::Final);
        return v.value_or(kNegInf);
    };
    NmStop stop;
    stop.d_lim = d_final;
    // long-stall guard: convergence is the intended exit, but a refinement
    // that stops improving for this long will not reach it either
    stop.max_no_improve = static_cast<int>(20 * (space.dim() + 1));
    stop.max_evals = broker.remaining();
    if (stop.max_evals <= 0) return;
    auto res = nm_run(objective, std::move(simplex), stop, &unit);
    for (const auto& [u, value] : res.evaluations) pool.add(space.from_unit(u), value);
}

namespace {

RunResult finalize(const ObservationPool& pool, RunTrace trace) {
    RunResult out;
    const auto best = pool.best_index();
    if (!best)
        throw InfeasibleSpaceError("no finite likelihood value in the pool");
    out.theta_star = pool[*best].theta;
    out.l_star = pool[*best].value;
    out.trace = std::move(trace);
    out.pool = pool;
    return out;
}

} // namespace

RunResult run_accelerated(const ParameterSpace& space, const LikelihoodFn& likelihood,
                          const SchedulerConfig& cfg_in, const GpConfig& gp_cfg,
                          const NmCoefficients& nm_coeff) {
    const SchedulerConfig cfg = cfg_in.resolved(space.dim());
    RunTrace trace;
    EvalBroker broker(likelihood, cfg.eval_budget, cfg.seed, trace);
    Rng rng_init(derive_seed(cfg.seed, 1));
    Rng rng_simplex(derive_seed(cfg.seed, 2));
    Rng rng_bo(derive_seed(cfg.seed, 3));
    Rng rng_final(derive_seed(cfg.seed, 4));

    ObservationPool pool = initialize_pool(space, cfg.init_samples, broker, rng_init);
    GpTrainState train_state;
    double d0 = 0.0;
    int round = 0;
    while (!broker.exhausted()) {
        ++round;
        const auto nm_info = nm_phase(pool, space, nm_coeff, cfg.top_m, round,
                                      cfg.nm_patience, d0, cfg.rebaseline_d0, broker,
                                      rng_simplex);
        {
            SwitchEvent ev;
            ev.eval_index = broker.used();
            ev.from = "nm";
            ev.to = "bo";
            ev.reason = to_string(nm_info.reason);
            ev.triggering_value = pool.best_value();
            ev.pool_size = pool.size();
            ev.round = round;
            ev.d0 = nm_info.d0;
            ev.d_lim = nm_info.d_lim;
            trace.switches.push_back(std::move(ev));
        }
        if (broker.exhausted()) break;

        const BoOutcome outcome = bo_phase(pool, space, gp_cfg, cfg.top_m,
                                           cfg.bo_stagnation, broker, rng_bo, train_state);
        {
            SwitchEvent ev;
            ev.eval_index = broker.used();
            ev.from = "bo";
            ev.pool_size = pool.size();
            if (outcome == BoOutcome::SwitchToNm) {
                ev.to = "nm";
                ev.reason = "top_m";
                ev.triggering_value = trace.entries.empty() ? kNegInf
                                                            : trace.entries.back().value;
                ev.rank = pool.rank_of_value(ev.triggering_value);
            } else {
                ev.to = "final";
                ev.reason = broker.exhausted() ? "stagnated_budget" : "stagnated";
            }
            trace.switches.push_back(std::move(ev));
        }
        if (outcome == BoOutcome::Stagnated) break;
    }

    final_refinement(pool, space, nm_coeff, cfg.d_final, broker, rng_final);
    return finalize(pool, std::move(trace));
}

RunResult run_plain_bo(const ParameterSpace& space, const LikelihoodFn& likelihood,
                       const SchedulerConfig& cfg_in, const GpConfig& gp_cfg) {
    const SchedulerConfig cfg = cfg_in.resolved(space.dim());
    RunTrace trace;
    EvalBroker broker(likelihood, cfg.eval_budget, cfg.seed, trace);
    Rng rng_init(derive_seed(cfg.seed, 1));
    Rng rng_bo(derive_seed(cfg.seed, 3));

    ObservationPool pool = initialize_pool(space, cfg.init_samples, broker, rng_init);
    GpTrainState train_state;
    while (!broker.exhausted()) {
        if (pool.finite_count() < 2) {
            Vec u(space.dim());
            for (Eigen::Index i = 0; i < space.dim(); ++i) u[i] = rng_bo.uniform();
            const auto value = broker.evaluate(space.from_unit(u), Phase::Bo);
            if (!value) break;
            pool.add(space.from_unit(u), *value);
            continue;
        }
        GpModel gp = fit_or_condition(pool, space, gp_cfg, train_state,
                                      derive_seed(static_cast<uint64_t>(broker.used()), 23));
        Vec theta = maximize_acquisition(gp, space, gp_cfg.acq, pool.best_value(),
                                         derive_seed(static_cast<uint64_t>(broker.used()), 31));
        const auto value = broker.evaluate(theta, Phase::Bo);
        if (!value) break;
        pool.add(theta, *value);
    }
    return finalize(pool, std::move(trace));
}

RunResult run_plain_nm(const ParameterSpace& space, const LikelihoodFn& likelihood,
                       const SchedulerConfig& cfg_in, const NmCoefficients& nm_coeff) {
    const SchedulerConfig cfg = cfg_in.resolved(space.dim());
    RunTrace trace;
    EvalBroker broker(likelihood, cfg.eval_budget, cfg.seed, trace);
    Rng rng_init(derive_seed(cfg.seed, 1));
    Rng rng_simplex(derive_seed(cfg.seed, 2));

    ObservationPool pool = initialize_pool(space, cfg.init_samples, broker, rng_init);
    const Box unit = Box::unit(space.dim());
    while (!broker.exhausted()) {
        Simplex simplex = build_nm_simplex(pool, space, cfg.top_m, rng_simplex, nm_coeff);
        ObjectiveFn objective = [&](const Vec& u) {
            const auto v = broker.evaluate(space.from_unit(u), Phase::Nm);
            return v.value_or(kNegInf);
        };
        NmStop stop;
        stop.d_lim = cfg.d_final;
        stop.max_no_improve = cfg.nm_patience;
        stop.max_evals = broker.remaining();
        auto res = nm_run(objective, std::move(simplex), stop, &unit);
        for (const auto& [u, value] : res.evaluations) pool.add(space.from_unit(u), value);
        if (res.evaluations.empty() && broker.exhausted()) break;
        if (res.evaluations.empty()) break; // converged instantly; restart would loop
    }
    return finalize(pool, std::move(trace));
}

OptimizerKind optimizer_kind_from_string(const std::string& s) {
    if (s == "accelerated") return OptimizerKind::Accelerated;
    if (s == "plain_bo") return OptimizerKind::PlainBo;
    if (s == "plain_nm") return OptimizerKind::PlainNm;
    throw ConfigError("unknown optimizer '" + s + "'");
}

std::string to_string(OptimizerKind k) {
    switch (k) {
        case OptimizerKind::Accelerated: return "accelerated";
        case OptimizerKind::PlainBo: return "plain_bo";
        case OptimizerKind::PlainNm: return "plain_nm";
    }
    return "?";
}

RunResult run_optimizer(OptimizerKind kind, const ParameterSpace& space,
                        const LikelihoodFn& likelihood, const SchedulerConfig& cfg,
                        const GpConfig& gp_cfg, const NmCoefficients& nm_coeff) {
    switch (kind) {
        case OptimizerKind::Accelerated:
            return run_accelerated(space, likelihood, cfg, gp_cfg, nm_coeff);
        case OptimizerKind::PlainBo:
            return run_plain_bo(space, likelihood, cfg, gp_cfg);
        case OptimizerKind::PlainNm:
            return run_plain_nm(space, likelihood, cfg, nm_coeff);
    }
    throw ConfigError("run_optimizer: bad kind");
}

} // namespace ssmid
