// Acceptance suite: end-to-end checks of the shipped toolkit, one printed
// pass/fail line per criterion. Run with no arguments for the full suite or
// with criterion numbers (e.g. "ssmid_acceptance 1 4 9") during development.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "ssmid/battx.hpp"
#include "ssmid/csv.hpp"
#include "ssmid/harness/experiment.hpp"
#include "ssmid/harness/profile.hpp"
#include "ssmid/hybrid.hpp"
#include "ssmid/likelihood.hpp"
#include "ssmid/simulate.hpp"
#include "ssmid/toy_models.hpp"
#include "support/kalman_oracle.hpp"

using namespace ssmid;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double sample_sd(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream ss;
    ss.precision(prec);
    ss << v;
    return ss.str();
}

// ---------------------------------------------------------------------------
// shared BattX fixtures
// ---------------------------------------------------------------------------

struct BattxData {
    battx::Config cfg = battx::Config::uniform(5);
    Vec theta_true = battx::nominal_params().to_vector();
    Model model = battx::make_model(cfg, 1.0);
    NoiseSpec noise;
    std::vector<DatasetBinding> identify;   // noisy
    DatasetBinding held_out;                // noiseless
};

Mat random_walk_profile(long steps, double ambient, uint64_t seed, double capacity_ah) {
    harness::ProfileSpec p;
    p.kind = "random_walk";
    p.duration_s = static_cast<double>(steps);
    p.ambient_k = ambient;
    p.seed = seed;
    return harness::generate_profile(p, capacity_ah);
}

Mat constant_profile(long steps, double c_rate, double ambient, double capacity_ah) {
    Mat prof(steps, 2);
    prof.col(0).setConstant(-c_rate * capacity_ah);
    prof.col(1).setConstant(ambient);
    return prof;
}

DatasetBinding make_battx_dataset(const BattxData& bd, const Mat& inputs,
                                  const std::string& label, bool noiseless,
                                  uint64_t seed) {
    DatasetBinding b;
    b.data.dt = 1.0;
    b.data.label = label;
    b.data.inputs = inputs;
    b.x0 = battx::initial_state(bd.cfg, 1.0, inputs(0, 1));
    const auto sim = simulate(bd.model, b.x0, inputs, bd.theta_true,
                              noiseless ? nullptr : &bd.noise, seed);
    b.data.measurements = sim.measurements;
    return b;
}

BattxData make_battx_data(long t_len) {
    BattxData bd;
    Vec r(2);
    r << 1e-3, 1e-2;
    bd.noise.Q = 1e-8 * Mat::Identity(10, 10);
    bd.noise.R = r.asDiagonal().toDenseMatrix();
    const double cap = 2.5;
    bd.identify.push_back(make_battx_dataset(
        bd, constant_profile(t_len, 3.0, 303.0, cap), "cc3_303K", false, 101));
    bd.identify.push_back(make_battx_dataset(
        bd, random_walk_profile(t_len, 293.0, 7, cap), "rw_293K", false, 102));
    bd.held_out =
        make_battx_dataset(bd, random_walk_profile(t_len, 298.0, 19, cap),
                           "rw_298K_holdout", true, 103);
    return bd;
}

// ---------------------------------------------------------------------------
// criterion 1: U-IPF vs exact Kalman filter
// ---------------------------------------------------------------------------

Outcome criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    Model m;
    m.state_dim = m.input_dim = m.meas_dim = 1;
    m.transition = [](const Vec& x, const Vec&, const Vec& th) { return Vec(th[0] * x); };
    m.measurement = [](const Vec& x, const Vec&, const Vec&) { return x; };
    const Vec theta = Vec::Constant(1, 0.9);
    const NoiseSpec ns = NoiseSpec::isotropic(1, 0.1, 1, 0.1);
    const Vec x0 = Vec::Constant(1, 1.0);
    const long t_len = 200;

    Dataset ds;
    ds.dt = 1.0;
    ds.label = "lg";
    ds.inputs = Mat::Zero(t_len, 1);
    ds.measurements = simulate(m, x0, ds.inputs, theta, &ns, 2024).measurements;

    const oracle::LinearGaussianModel om{Mat::Constant(1, 1, 0.9), Mat::Identity(1, 1),
                                         0.1 * Mat::Identity(1, 1),
                                         0.1 * Mat::Identity(1, 1), x0,
                                         1e-6 * Mat::Identity(1, 1)};
    const double l_kf = oracle::kalman_log_likelihood(om, ds.measurements).log_likelihood;

    LikelihoodConfig cfg;
    cfg.num_particles = 100;
    UtParams ut;
    double worst = 0.0;
    int ok = 0;
    for (uint64_t seed = 0; seed < 10; ++seed) {
        const auto res = uipf_log_likelihood(m, theta, ds, x0, ns, cfg, ut, seed);
        const double err = std::abs(res.value - l_kf);
        worst = std::max(worst, err);
        if (res.ok() && err <= 0.05 * static_cast<double>(t_len)) ++ok;
    }
    const double secs = elapsed_s(t0);
    Outcome out;
    out.pass = (ok == 10) && secs < 5.0;
    out.detail = "10-seed max |L_uipf - L_kf| = " + fmt(worst) + " nats (limit 10), " +
                 fmt(secs, 3) + " s";
    return out;
}

// ---------------------------------------------------------------------------
// criterion 2: filter variance direction on the battery model
// ---------------------------------------------------------------------------

Outcome criterion_2() {
    const auto t0 = std::chrono::steady_clock::now();
    const BattxData bd = make_battx_data(300);
    const auto& b = bd.identify.front(); // constant 3C dataset, T=300
    LikelihoodConfig lk;
    lk.num_particles = 10;
    UtParams ut;
    const int reps = 100;
    std::vector<double> uipf_vals(reps), apf_vals(reps);
    for (int i = 0; i < reps; ++i) {
        uipf_vals[static_cast<size_t>(i)] =
            uipf_log_likelihood(bd.model, bd.theta_true, b.data, b.x0, bd.noise, lk, ut,
                                static_cast<uint64_t>(i))
                .value;
        apf_vals[static_cast<size_t>(i)] =
            apf_log_likelihood(bd.model, bd.theta_true, b.data, b.x0, bd.noise, 100,
                               static_cast<uint64_t>(i))
                .value;
    }
    const double sd_uipf = sample_sd(uipf_vals);
    const double sd_apf = sample_sd(apf_vals);
    const double secs = elapsed_s(t0);
    Outcome out;
    out.pass = std::isfinite(sd_uipf) && std::isfinite(sd_apf) && sd_uipf < sd_apf &&
               secs < 600.0;
    out.detail = "std[U-IPF, Np=10] = " + fmt(sd_uipf) + " < std[APF, Np=100] = " +
                 fmt(sd_apf) + " nats over 100 reps, " + fmt(secs, 3) + " s";
    return out;
}

// ---------------------------------------------------------------------------
// criterion 3: GP posterior consistency and EI closed form
// ---------------------------------------------------------------------------

Outcome criterion_3() {
    // posterior: Cholesky path vs dense inverse
    Rng rng(501);
    double worst_mean = 0.0, worst_sd = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + static_cast<int>(rng.integer(4));
        std::vector<std::string> names;
        for (int i = 0; i < d; ++i) names.push_back("x" + std::to_string(i));
        const ParameterSpace space(names, Vec::Zero(d), Vec::Ones(d));
        ObservationPool pool;
        const int q = 3 + static_cast<int>(rng.integer(48));
        for (int i = 0; i < q; ++i) {
            Vec x(d);
            for (int j = 0; j < d; ++j) x[j] = rng.uniform();
            pool.add(x, std::sin(4.0 * x.sum()) + 0.05 * rng.normal());
        }
        KernelSpec kern;
        kern.family = trial % 2 ? KernelFamily::Matern52 : KernelFamily::SquaredExponential;
        kern.signal_var = 1.2;
        kern.lengthscales = Vec::Constant(d, 0.35);
        kern.noise_var = 1e-4;
        const GpModel gp = GpModel::condition(pool, space, kern);

        // dense Eq.-style reference
        Mat x_all(q, d);
        Vec y(q);
        for (int i = 0; i < q; ++i) {
            x_all.row(i) = space.to_unit(pool[static_cast<size_t>(i)].theta).transpose();
            y[i] = pool[static_cast<size_t>(i)].value;
        }
        const double mu0 = y.mean();
        double ysd = std::sqrt((y.array() - mu0).square().mean());
        if (ysd < 1e-12) ysd = 1.0;
        Mat k(q, q);
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j)
                k(i, j) = kernel_eval(kern, x_all.row(i).transpose(),
                                      x_all.row(j).transpose());
        k.diagonal().array() += kern.noise_var;
        const Mat k_inv = k.inverse();
        for (int probe = 0; probe < 4; ++probe) {
            Vec u(d);
            for (int j = 0; j < d; ++j) u[j] = rng.uniform();
            Vec kbar(q);
            for (int i = 0; i < q; ++i)
                kbar[i] = kernel_eval(kern, u, x_all.row(i).transpose());
            const Vec ystd = (y.array() - mu0) / ysd;
            const double mean_ref = mu0 + ysd * kbar.dot(k_inv * ystd);
            const double var_ref =
                std::max(0.0, kernel_eval(kern, u, u) - kbar.dot(k_inv * kbar));
            const auto post = gp.posterior(u);
            worst_mean = std::max(worst_mean, std::abs(post.mean - mean_ref));
            worst_sd = std::max(worst_sd,
                                std::abs(post.sd - ysd * std::sqrt(var_ref)));
        }
    }
    const bool posterior_ok = worst_mean < 1e-8 && worst_sd < 1e-8;

    // EI closed form vs Monte Carlo at 20 random probes
    const ParameterSpace space({"x0", "x1"}, Vec::Zero(2), Vec::Ones(2));
    ObservationPool pool;
    Rng pool_rng(77);
    for (int i = 0; i < 12; ++i) {
        Vec x(2);
        x << pool_rng.uniform(), pool_rng.uniform();
        pool.add(x, 0.25 * pool_rng.normal());
    }
    KernelSpec kern;
    kern.family = KernelFamily::Matern52;
    kern.signal_var = 1.0;
    kern.lengthscales = Vec::Constant(2, 0.4);
    kern.noise_var = 1e-6;
    const GpModel gp = GpModel::condition(pool, space, kern);
    const double l_star = pool.best_value();

    Rng probe_rng(91);
    Rng mc_rng(92);
    double worst_rel = 0.0;
    bool ei_ok = true;
    for (int probe = 0; probe < 20; ++probe) {
        Vec u(2);
        u << probe_rng.uniform(), probe_rng.uniform();
        const double cf = expected_improvement(gp, u, l_star);
        const auto post = gp.posterior(u);
        const int n = 1000000;
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += std::max(post.mean + post.sd * mc_rng.normal() - l_star, 0.0);
        const double mc = acc / n;
        // 1e6 draws cannot resolve improvements far below the posterior
        // scale; below that floor both estimates are numerically zero
        const double floor = 1e-3 * (post.sd + 1e-12);
        if (cf < floor && mc < floor) continue;
        const double rel = std::abs(cf - mc) / std::max(cf, mc);
        worst_rel = std::max(worst_rel, rel);
        if (rel > 0.01) ei_ok = false;
    }

    Outcome out;
    out.pass = posterior_ok && ei_ok;
    out.detail = "posterior max |err| = " + fmt(std::max(worst_mean, worst_sd)) +
                 " (limit 1e-8); EI worst rel err = " + fmt(worst_rel) + " (limit 0.01)";
    return out;
}

// ---------------------------------------------------------------------------
// criterion 4: Nelder-Mead correctness
// ---------------------------------------------------------------------------

Outcome criterion_4() {
    long evals = 0;
    ObjectiveFn rosen = [&](const Vec& x) {
        ++evals;
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        return -(a * a + 100.0 * b * b);
    };
    std::vector<Vertex> vs;
    for (const auto& p : {std::pair{-1.2, 1.0}, {-0.9, 1.0}, {-1.2, 1.3}}) {
        Vec x(2);
        x << p.first, p.second;
        vs.push_back({x, rosen(x)});
    }
    evals = 0;
    NmStop stop;
    stop.d_lim = 1e-10;
    stop.max_no_improve = 200;
    stop.max_evals = 2000;
    Box box{Vec::Constant(2, -2.0), Vec::Constant(2, 2.0)};
    const auto res = nm_run(rosen, make_simplex(std::move(vs)), stop, &box);
    const double dist = std::hypot(res.best.x[0] - 1.0, res.best.x[1] - 1.0);
    const bool rosen_ok = dist < 1e-3 && evals <= 2000;

    // monotone best value on 100 random quadratics
    Rng rng(71);
    bool mono_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + static_cast<int>(rng.integer(4));
        Vec center(d);
        for (int i = 0; i < d; ++i) center[i] = rng.uniform(-1.0, 1.0);
        ObjectiveFn f = [&](const Vec& x) { return -(x - center).squaredNorm(); };
        std::vector<Vertex> init;
        for (int i = 0; i <= d; ++i) {
            Vec x(d);
            for (int j = 0; j < d; ++j) x[j] = rng.uniform(-2.0, 2.0);
            init.push_back({x, f(x)});
        }
        Simplex s = order_simplex(make_simplex(std::move(init)));
        double best = s.vertices[0].value;
        for (int k = 0; k < 40; ++k) {
            nm_step(s, f);
            if (s.vertices[0].value < best - 1e-15) mono_ok = false;
            best = s.vertices[0].value;
        }
    }

    Outcome out;
    out.pass = rosen_ok && mono_ok;
    out.detail = "Rosenbrock |x-(1,1)| = " + fmt(dist) + " in " + std::to_string(evals) +
                 " evals; monotonicity on 100 quadratics " +
                 (mono_ok ? "held" : "VIOLATED");
    return out;
}

// ---------------------------------------------------------------------------
// criterion 5: hybrid scheduler on a 4-D concave quadratic
// ---------------------------------------------------------------------------

Outcome criterion_5() {
    const int d = 4;
    std::vector<std::string> names;
    for (int i = 0; i < d; ++i) names.push_back("p" + std::to_string(i));
    const ParameterSpace space(names, Vec::Constant(d, -1.0), Vec::Constant(d, 3.0));
    Vec peak(d);
    peak << 0.6, 1.9, -0.2, 2.4;
    Mat a(d, d);
    a << 2, 0.3, 0, 0.1, 0.3, 1.5, 0.2, 0, 0, 0.2, 1, 0.4, 0.1, 0, 0.4, 2.5;
    const Mat h = 0.5 * (a + a.transpose()) + 2.0 * Mat::Identity(d, d);
    LikelihoodFn fn = [&](const Vec& theta, uint64_t) {
        const Vec r = theta - peak;
        return -r.dot(h * r);
    };

    GpConfig gp;
    gp.train.n_starts = 2;
    gp.train.max_evals_per_start = 80;
    gp.train.hyper_subsample = 120;
    gp.refit_dense_until = 60;
    gp.refit_interval = 8;
    gp.acq.n_starts = 16;
    gp.acq.n_polish = 4;
    gp.acq.polish_max_evals = 40;

    int found = 0;
    bool invariants_ok = true;
    std::string failure;
    double worst_dist = 0.0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        SchedulerConfig cfg;
        cfg.eval_budget = 500;
        cfg.seed = seed;
        cfg.top_m = 3;
        const auto res = run_accelerated(space, fn, cfg, gp);
        const double dist = (space.to_unit(res.theta_star) - space.to_unit(peak)).norm();
        worst_dist = std::max(worst_dist, dist);
        if (dist < 1e-2) ++found;

        // invariant 1: monotone best-so-far
        const auto best = res.trace.best_so_far();
        for (size_t i = 1; i < best.size(); ++i)
            if (best[i] < best[i - 1]) {
                invariants_ok = false;
                failure = "monotonicity";
            }
        // invariant 2: budget law with dense indices
        if (static_cast<long>(res.trace.entries.size()) > cfg.eval_budget) {
            invariants_ok = false;
            failure = "budget";
        }
        for (size_t i = 0; i < res.trace.entries.size(); ++i)
            if (res.trace.entries[i].index != static_cast<long>(i) + 1) {
                invariants_ok = false;
                failure = "budget-indexing";
            }
        // invariant 3: switch soundness
        for (const auto& ev : res.trace.switches)
            if (ev.from == "bo" && ev.to == "nm" &&
                (ev.rank < 1 || ev.rank > cfg.top_m)) {
                invariants_ok = false;
                failure = "switch-rank";
            }
        // invariant 4: schedule soundness (d_lim == d0 / 2^round exactly)
        for (const auto& ev : res.trace.switches)
            if (ev.from == "nm" && ev.round >= 1 &&
                ev.d_lim != ev.d0 / std::pow(2.0, ev.round)) {
                invariants_ok = false;
                failure = "schedule";
            }
        // invariant 5: determinism (repeat seed 0 only, to bound runtime)
        if (seed == 0) {
            const auto res2 = run_accelerated(space, fn, cfg, gp);
            if (res2.trace.entries.size() != res.trace.entries.size()) {
                invariants_ok = false;
                failure = "determinism";
            } else {
                for (size_t i = 0; i < res.trace.entries.size(); ++i)
                    if (res.trace.entries[i].value != res2.trace.entries[i].value ||
                        (res.trace.entries[i].theta - res2.trace.entries[i].theta)
                                .norm() != 0.0) {
                        invariants_ok = false;
                        failure = "determinism";
                    }
            }
        }
    }

    Outcome out;
    out.pass = (found == 20) && invariants_ok;
    out.detail = std::to_string(found) + "/20 seeds within 1e-2 (worst " +
                 fmt(worst_dist) + "), <= 500 evals; invariants " +
                 (invariants_ok ? "held" : ("VIOLATED: " + failure));
    return out;
}

// ---------------------------------------------------------------------------
// criterion 6: toy nonlinear SSM identification
// ---------------------------------------------------------------------------

struct ToyRun {
    double l_hat;
    double l_true;
    Vec theta_hat;
    long evals_to_threshold; // first index with best >= l_true - 1.0
};

Outcome criterion_6() {
    const Model model = make_logistic_model();
    const ParameterSpace space = logistic_space();
    const Vec theta_true = logistic_nominal();
    const NoiseSpec ns = NoiseSpec::isotropic(1, 1e-6, 1, 1e-4);
    const long t_len = 300;

    // shared forcing input: seeded smoothed walk within +-0.2
    Mat inputs(t_len, 1);
    {
        Rng rng(314);
        double raw = 0.0, smooth = 0.0;
        for (long k = 0; k < t_len; ++k) {
            raw += 0.08 * rng.normal();
            raw = std::clamp(raw, -0.2, 0.2);
            smooth += 0.2 * (raw - smooth);
            inputs(k, 0) = smooth;
        }
    }
    const Vec x0 = Vec::Constant(1, 0.5);

    LikelihoodConfig lk;
    lk.num_particles = 50;
    UtParams ut;

    GpConfig gp;
    gp.train.n_starts = 2;
    gp.train.max_evals_per_start = 60;
    gp.refit_dense_until = 60;
    gp.refit_interval = 6;
    gp.acq.n_starts = 16;
    gp.acq.n_polish = 4;
    gp.acq.polish_max_evals = 30;

    const int n_seeds = 10;
    std::vector<double> gap, evals_acc, evals_bo;
    std::vector<std::vector<double>> rel_err(3);
    for (uint64_t seed = 0; seed < n_seeds; ++seed) {
        // fresh dataset per seed; identical for both optimizers
        Dataset ds;
        ds.dt = 1.0;
        ds.label = "toy";
        ds.inputs = inputs;
        ds.measurements =
            simulate(model, x0, inputs, theta_true, &ns, 9000 + seed).measurements;
        std::vector<DatasetBinding> bindings{{ds, x0}};

        LikelihoodFn fn = [&](const Vec& theta, uint64_t s) {
            return uipf_log_likelihood(model, theta, ds, x0, ns, lk, ut, s).value;
        };
        const uint64_t score_seed = derive_seed(seed, 4242);
        const double l_true = fn(theta_true, score_seed);

        SchedulerConfig cfg;
        cfg.eval_budget = 260;
        cfg.seed = seed;
        cfg.top_m = 2;
        const auto acc = run_accelerated(space, fn, cfg, gp);
        const auto bo = run_plain_bo(space, fn, cfg, gp);

        const double l_hat = fn(acc.theta_star, score_seed);
        gap.push_back(l_hat - l_true);
        for (int j = 0; j < 3; ++j)
            rel_err[static_cast<size_t>(j)].push_back(
                std::abs(acc.theta_star[j] - theta_true[j]) / std::abs(theta_true[j]));

        auto evals_to = [&](const RunTrace& trace) {
            const auto best = trace.best_so_far();
            for (size_t i = 0; i < best.size(); ++i)
                if (best[i] >= l_true - 1.0) return static_cast<double>(i + 1);
            return static_cast<double>(best.size() * 4); // never reached
        };
        evals_acc.push_back(evals_to(acc.trace));
        evals_bo.push_back(evals_to(bo.trace));
    }

    const double med_gap = median(gap);
    const double med_rel_worst = std::max(
        {median(rel_err[0]), median(rel_err[1]), median(rel_err[2])});
    const double med_acc = median(evals_acc);
    const double med_bo = median(evals_bo);

    Outcome out;
    out.pass = med_gap >= -1.0 && med_rel_worst <= 0.10 && med_acc < med_bo;
    out.detail = "median L gap = " + fmt(med_gap) + " (>= -1), worst median rel err = " +
                 fmt(med_rel_worst) + " (<= 0.1), median evals-to-threshold " +
                 fmt(med_acc, 6) + " (accelerated) < " + fmt(med_bo, 6) + " (plain BO)";
    return out;
}

// ---------------------------------------------------------------------------
// criterion 7: desk-scale BattX recovery
// ---------------------------------------------------------------------------

// Identification runs in three stages, every evaluation inside the model's
// search ranges: (A) an ensemble of global runs under the cheap
// deterministic-dynamics likelihood (process noise is 1e-8), (B) a
// deterministic polish on a +-6%-of-range region around the ensemble best,
// and (C) a particle-filter refinement on a +-2%-of-range region with
// common random numbers, so the refinement objective is exactly the scoring
// function the gate uses.
Outcome criterion_7() {
    const auto t0 = std::chrono::steady_clock::now();
    const BattxData bd = make_battx_data(600);
    const ParameterSpace table = battx::default_space();
    auto data = std::make_shared<std::vector<DatasetBinding>>(bd.identify);
    UtParams ut;

    LikelihoodConfig det;
    det.num_particles = 1;
    det.floor = -1e6;
    LikelihoodFn fn_det = [=, &bd](const Vec& theta, uint64_t seed) {
        return total_log_likelihood(bd.model, theta, *data, bd.noise, det, UtParams{},
                                    seed, LikelihoodMethod::Deterministic, true)
            .value;
    };

    GpConfig gp;
    gp.train.n_starts = 2;
    gp.train.max_evals_per_start = 100;
    gp.train.hyper_subsample = 120;
    gp.refit_dense_until = 80;
    gp.refit_interval = 10;
    gp.acq.n_starts = 24;
    gp.acq.n_polish = 6;
    gp.acq.polish_max_evals = 40;

    auto shrink_box = [&](const Vec& center, double frac) {
        Vec lo(table.dim()), hi(table.dim());
        for (Eigen::Index i = 0; i < table.dim(); ++i) {
            const double w = frac * (table.upper()[i] - table.lower()[i]);
            lo[i] = std::max(table.lower()[i], center[i] - w);
            hi[i] = std::min(table.upper()[i], center[i] + w);
        }
        return ParameterSpace(table.names(), lo, hi, table.units());
    };

    // stage A: global ensemble
    struct Variant {
        OptimizerKind kind;
        int m;
        uint64_t seed;
    };
    const std::vector<Variant> variants{
        {OptimizerKind::Accelerated, 18, 2601}, {OptimizerKind::Accelerated, 18, 1003},
        {OptimizerKind::PlainNm, 3, 2601},      {OptimizerKind::PlainNm, 3, 1003},
        {OptimizerKind::PlainNm, 18, 2601},     {OptimizerKind::PlainNm, 18, 1003}};
    Vec best_theta;
    double best_val = kNegInf;
    for (const auto& v : variants) {
        SchedulerConfig sc;
        sc.eval_budget = 60000;
        sc.init_samples = 1500;
        sc.seed = v.seed;
        sc.top_m = v.m;
        sc.bo_stagnation = 60;
        const auto res = run_optimizer(v.kind, table, fn_det, sc, gp);
        if (res.l_star > best_val) {
            best_val = res.l_star;
            best_theta = res.theta_star;
        }
    }

    // stage B: deterministic polish near the ensemble best
    {
        const ParameterSpace box = shrink_box(best_theta, 0.06);
        SchedulerConfig sc;
        sc.eval_budget = 30000;
        sc.init_samples = 500;
        sc.seed = 4242;
        sc.top_m = 18;
        sc.bo_stagnation = 40;
        const auto res = run_accelerated(box, fn_det, sc, gp);
        if (res.l_star > best_val) {
            best_val = res.l_star;
            best_theta = res.theta_star;
        }
    }

    // stage C: particle-filter refinement with common random numbers
    const uint64_t crn_seed = derive_seed(2601, 777);
    LikelihoodConfig upf;
    upf.num_particles = 25;
    upf.floor = -1e6;
    LikelihoodFn fn_uipf = [=, &bd](const Vec& theta, uint64_t) {
        return total_log_likelihood(bd.model, theta, *data, bd.noise, upf, ut,
                                    crn_seed, LikelihoodMethod::Uipf, true)
            .value;
    };
    Vec theta_hat;
    {
        const ParameterSpace box = shrink_box(best_theta, 0.02);
        SchedulerConfig sc;
        sc.eval_budget = 2500;
        sc.init_samples = 60;
        sc.seed = 777;
        sc.top_m = 3;
        sc.bo_stagnation = 12;
        sc.d_final = 1e-4;
        const auto res = run_accelerated(box, fn_uipf, sc, gp);
        theta_hat = res.theta_star;
    }

    // gates: likelihood comparison under the refinement evaluator, plus the
    // same comparison at Np=100 for reference, plus held-out voltage RMSE
    const double l_hat = fn_uipf(theta_hat, 0);
    const double l_true = fn_uipf(bd.theta_true, 0);
    LikelihoodConfig big = upf;
    big.num_particles = 100;
    auto fn100 = [&](const Vec& theta) {
        return total_log_likelihood(bd.model, theta, *data, bd.noise, big, ut,
                                    crn_seed, LikelihoodMethod::Uipf, true)
            .value;
    };
    const double l100_hat = fn100(theta_hat);
    const double l100_true = fn100(bd.theta_true);

    const auto sim = simulate(bd.model, bd.held_out.x0, bd.held_out.data.inputs,
                              theta_hat, nullptr, 0);
    const Vec resid = bd.held_out.data.measurements.col(0) - sim.measurements.col(0);
    const double rmse_v =
        std::sqrt(resid.squaredNorm() / static_cast<double>(resid.size()));

    const bool in_range = table.contains(theta_hat, 1e-12);
    const double secs = elapsed_s(t0);
    Outcome out;
    out.pass = in_range && (l_hat >= l_true - 2.0) && (rmse_v <= 0.025) && secs < 7200.0;
    out.detail = "gap L(hat)-L(true) = " + fmt(l_hat - l_true) + " (limit -2; Np=100 gap " +
                 fmt(l100_hat - l100_true) + "); held-out voltage RMSE = " +
                 fmt(rmse_v * 1000.0, 4) + " mV (limit 25); " + fmt(secs, 4) + " s";
    return out;
}

// ---------------------------------------------------------------------------
// criterion 8: BattX physics suite
// ---------------------------------------------------------------------------

Outcome criterion_8() {
    const auto t0 = std::chrono::steady_clock::now();
    using namespace battx;
    Rng rng(880);
    const Config cfg = Config::uniform(5);
    bool ok = true;
    std::string what;

    auto random_params_draw = [&]() {
        Params p = nominal_params();
        p.c_s1 *= rng.uniform(0.6, 1.4);
        p.r_s1 *= rng.uniform(0.5, 2.0);
        p.c_e *= rng.uniform(0.6, 1.4);
        p.r_e *= rng.uniform(0.5, 2.0);
        p.c_core *= rng.uniform(0.6, 1.4);
        p.c_surf *= rng.uniform(0.6, 1.4);
        p.r_core *= rng.uniform(0.5, 2.0);
        p.r_surf *= rng.uniform(0.5, 2.0);
        p.kappa1 *= rng.uniform(0.5, 1.5);
        p.kappa2 *= rng.uniform(0.5, 1.5);
        return p;
    };
    auto random_state = [&]() {
        Vec x(10);
        for (int i = 0; i < 5; ++i) x[i] = rng.uniform(0.1, 0.9);
        for (int i = 5; i < 8; ++i) x[i] = rng.uniform(-0.1, 0.1);
        x[8] = rng.uniform(285.0, 315.0);
        x[9] = rng.uniform(285.0, 315.0);
        return x;
    };

    // charge conservation + electrolyte neutrality, 100 random draws each
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const Params p = random_params_draw();
        const Vec x = random_state();
        Vec u(2);
        u << rng.uniform(-12.0, 5.0), 298.0;
        const Vec dx = derivatives(x, u, p, cfg);
        double charge = 0.0;
        for (int i = 0; i < 5; ++i) charge += cfg.eta[i] * p.c_s1 * dx[i];
        if (std::abs(charge - u[0]) > 1e-10 * std::max(1.0, std::abs(u[0]))) {
            ok = false;
            what = "charge conservation";
        }
        if (std::abs(p.c_e * (dx[5] + dx[6] + dx[7])) > 1e-12 * std::max(1.0, std::abs(u[0]))) {
            ok = false;
            what = "electrolyte neutrality";
        }
    }

    // Arrhenius identities at T_ref, 100 draws
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const Params p = random_params_draw();
        const double s = rng.uniform(0.0, 1.0);
        if (diffusion_resistance(1, cfg.t_ref, p, cfg) != p.r_s1) {
            ok = false;
            what = "diffusion Arrhenius identity";
        }
        const double r_o = p.gamma1 + p.gamma2 * s + p.gamma3 * s * s;
        if (internal_resistance(s, cfg.t_ref, p, cfg) != r_o) {
            ok = false;
            what = "internal-resistance Arrhenius identity";
        }
    }

    // thermal relaxation from rest states, 100 draws
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const Params p = random_params_draw();
        const double t_start = rng.uniform(300.0, 330.0);
        const double t_amb = rng.uniform(280.0, 299.0);
        const Model m = make_model(cfg, 1.0);
        Mat inputs(200, 2);
        inputs.col(0).setZero();
        inputs.col(1).setConstant(t_amb);
        Vec x0 = initial_state(cfg, 0.7, t_start);
        const auto sim = simulate(m, x0, inputs, p.to_vector(), nullptr, 0);
        double prev_c = std::abs(t_start - t_amb), prev_s = std::abs(t_start - t_amb);
        for (Eigen::Index k = 0; k < sim.states.rows(); ++k) {
            const double dc = std::abs(sim.states(k, 8) - t_amb);
            const double dsf = std::abs(sim.states(k, 9) - t_amb);
            if (dc > prev_c + 1e-9 || dsf > prev_s + 1e-9) {
                ok = false;
                what = "thermal relaxation";
            }
            prev_c = dc;
            prev_s = dsf;
        }
    }

    // SoC monotone under constant discharge, 100 draws
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const Params p = random_params_draw();
        Vec u(2);
        u << rng.uniform(-12.0, -1.0), 298.0;
        Vec x = initial_state(cfg, 1.0, 298.0);
        double prev = soc(x, cfg, p);
        for (int k = 0; k < 150; ++k) {
            const auto st = step(x, u, p, cfg, 1.0);
            x = st.x;
            const double s = soc(x, cfg, p);
            if (st.saturated) break;
            if (s >= prev) {
                ok = false;
                what = "soc monotonicity";
            }
            prev = s;
        }
    }

    const double secs = elapsed_s(t0);
    Outcome out;
    out.pass = ok && secs < 30.0;
    out.detail = ok ? ("all 5 property families held on 100 draws each, " +
                       fmt(secs, 3) + " s")
                    : ("violated: " + what);
    return out;
}

// ---------------------------------------------------------------------------
// criterion 9: CLI determinism sweep
// ---------------------------------------------------------------------------

std::string slurp_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) return "<missing:" + p.string() + ">";
    return std::string((std::istreambuf_iterator<char>(f)), {});
}

bool dirs_identical(const fs::path& a, const fs::path& b, std::string& mismatch) {
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(a)) names.insert(e.path().filename());
    std::set<std::string> names_b;
    for (const auto& e : fs::directory_iterator(b)) names_b.insert(e.path().filename());
    if (names != names_b) {
        mismatch = "file sets differ";
        return false;
    }
    for (const auto& n : names)
        if (slurp_file(a / n) != slurp_file(b / n)) {
            mismatch = n;
            return false;
        }
    return true;
}

Outcome criterion_9() {
#ifndef SSMID_CLI_PATH
    return {false, "CLI path not configured"};
#else
    const fs::path root = fs::temp_directory_path() / "ssmid_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);

    const std::string truth =
        R"({"C_s1": 4521.0, "R_s1": 0.114, "C_e": 3691.0, "R_e": 0.007,
            "C_core": 40.0, "C_surf": 10.0, "R_core": 2.0, "R_surf": 3.0,
            "beta1": 0.789, "beta2": 0.317, "gamma1": 0.046, "gamma2": -0.035,
            "gamma3": 0.029, "kappa1": 30.0, "kappa2": 70.0,
            "c1": -0.0004, "c2": 0.002, "c3": -0.001})";
    const std::string base = R"({
  "seed": 7,
  "model": {"kind": "battx", "capacity_ah": 2.5},
  "truth": )" + truth + R"(,
  "datasets": [
    {"synthesize": {"label": "cc3", "profile": {"kind": "constant_crate", "c_rate": 3.0, "ambient_K": 303.0, "duration_s": 60.0}}},
    {"synthesize": {"label": "rw", "profile": {"kind": "random_walk", "ambient_K": 293.0, "duration_s": 60.0, "seed": 5}}}
  ],
  "validation_datasets": [
    {"synthesize": {"label": "holdout", "profile": {"kind": "constant_crate", "c_rate": 2.0, "ambient_K": 298.0, "duration_s": 60.0}, "noiseless": true}}
  ],
  "validate": {"theta": )" + truth + R"(},
  "likelihood": {"method": "uipf", "num_particles": 5},
  "scheduler": {"eval_budget": 42, "top_m": 3, "d_final": 0.01},
  "gp": {"n_starts": 1, "max_fit_evals": 30,
         "acquisition": {"n_starts": 8, "n_polish": 2, "polish_max_evals": 10}},
  "filter_comparison": {"particle_grid": [5, 10], "replications": 4},
  "optimizer_comparison": {"optimizers": ["plain_nm", "accelerated"], "replications": 2}
})";
    const fs::path cfg_path = root / "config.json";
    {
        std::ofstream f(cfg_path);
        f << base;
    }

    const std::vector<std::string> subcommands{"simulate", "identify", "validate",
                                               "compare-filters", "compare-optimizers"};
    for (const auto& sub : subcommands) {
        for (const auto& run : {"a", "b"}) {
            const fs::path out = root / (sub + "_" + run);
            const std::string cmd = std::string(SSMID_CLI_PATH) + " " + sub +
                                    " --config " + cfg_path.string() + " --out " +
                                    out.string() + " > /dev/null 2>&1";
            const int rc = std::system(cmd.c_str());
            if (rc != 0)
                return {false, sub + " exited with code " + std::to_string(rc)};
        }
        std::string mismatch;
        if (!dirs_identical(root / (sub + "_a"), root / (sub + "_b"), mismatch))
            return {false, sub + " outputs differ: " + mismatch};
    }

    // documented exit codes: 2 for config errors, 3 for an infeasible space
    auto exit_code = [](int rc) {
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    {
        const fs::path bad = root / "bad.json";
        std::ofstream f(bad);
        f << R"({"model": {"kind": "battx"}, "unknown_key": 1})";
        f.close();
        const int rc = std::system((std::string(SSMID_CLI_PATH) +
                                    " identify --config " + bad.string() +
                                    " --out " + (root / "bad_out").string() +
                                    " > /dev/null 2>&1")
                                       .c_str());
        if (exit_code(rc) != 2)
            return {false, "config error exit code was " + std::to_string(exit_code(rc))};
    }
    {
        // an absurd likelihood floor marks every sample infeasible
        auto infeasible = nlohmann::json::parse(base);
        infeasible["likelihood"]["floor"] = 1e18;
        const fs::path inf_cfg = root / "infeasible.json";
        std::ofstream f(inf_cfg);
        f << infeasible.dump(2);
        f.close();
        const int rc = std::system((std::string(SSMID_CLI_PATH) +
                                    " identify --config " + inf_cfg.string() +
                                    " --out " + (root / "inf_out").string() +
                                    " > /dev/null 2>&1")
                                       .c_str());
        if (exit_code(rc) != 3)
            return {false,
                    "infeasible-space exit code was " + std::to_string(exit_code(rc))};
    }
    return {true, "all 5 subcommands re-ran byte-identically; exit codes honored"};
#endif
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
    auto selected = [&](int n) {
        return wanted.empty() || std::find(wanted.begin(), wanted.end(), n) != wanted.end();
    };

    struct Entry {
        int num;
        const char* name;
        std::function<Outcome()> fn;
    };
    const std::vector<Entry> criteria{
        {1, "Kalman-oracle equivalence of the U-IPF likelihood", criterion_1},
        {2, "filter variance: U-IPF(Np=10) tighter than APF(Np=100)", criterion_2},
        {3, "GP posterior consistency and closed-form EI", criterion_3},
        {4, "Nelder-Mead correctness", criterion_4},
        {5, "hybrid optimizer on a 4-D concave quadratic", criterion_5},
        {6, "toy nonlinear SSM identification", criterion_6},
        {7, "desk-scale battery model recovery (18 parameters)", criterion_7},
        {8, "battery model physics suite", criterion_8},
        {9, "CLI determinism sweep", criterion_9},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected(c.num)) continue;
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        std::cout << (out.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.num << ": "
                  << c.name << " -- " << out.detail << std::endl;
        if (!out.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
