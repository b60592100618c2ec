#include "ssmid/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "ssmid/csv.hpp"
#include "ssmid/harness/profile.hpp"
#include "ssmid/simulate.hpp"
#include "ssmid/toy_models.hpp"

namespace ssmid::harness {

namespace {

constexpr uint64_t kTruthScoreStream = 9001;

json jnum(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

std::string fmt17(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + path.string() + "' for writing");
    f << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

/// Index-parallel loop with deterministic result placement.
template <typename F>
void parallel_for(size_t n, int workers, F&& body) {
    if (n == 0) return;
    const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (w == 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(w));
    for (int t = 0; t < w; ++t)
        threads.emplace_back([&, t] {
            for (size_t i = static_cast<size_t>(t); i < n; i += static_cast<size_t>(w))
                body(i);
        });
    for (auto& th : threads) th.join();
}

int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 2 : static_cast<int>(hw);
}

std::vector<double> quantiles(std::vector<double> v, const std::vector<double>& ps) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double p : ps) {
        const double h = p * static_cast<double>(v.size() - 1);
        const size_t lo = static_cast<size_t>(std::floor(h));
        const size_t hi = std::min(lo + 1, v.size() - 1);
        out.push_back(v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]));
    }
    return out;
}

} // namespace

Experiment::Experiment(RunConfig cfg)
    : cfg_(std::move(cfg)),
      space_(cfg_.space ? *cfg_.space
                        : (cfg_.model.kind == "battx" ? battx::default_space()
                                                      : logistic_space())) {
    if (cfg_.model.kind == "battx") {
        input_names_ = battx_input_names();
        meas_names_ = battx_meas_names();
    } else {
        input_names_ = {"u1"};
        meas_names_ = {"z1"};
    }
    if (cfg_.model.kind == "battx" && space_.dim() != battx::kNumParams)
        throw ConfigError("battx parameter space must have 18 dimensions");
}

Model Experiment::model_at(double dt) const {
    if (cfg_.model.kind == "battx")
        return battx::make_model(cfg_.model.battx_config(), dt);
    return make_logistic_model();
}

int Experiment::state_dim() const {
    return cfg_.model.kind == "battx" ? cfg_.model.battx_config().state_dim() : 1;
}

Vec Experiment::x0_for(const Dataset& ds) const {
    if (cfg_.model.kind == "battx") {
        const double t_amb = ds.inputs(0, 1);
        return battx::initial_state(cfg_.model.battx_config(), cfg_.model.initial_soc,
                                    t_amb);
    }
    return Vec::Constant(1, cfg_.model.logistic_x0);
}

NoiseSpec Experiment::noise() const {
    const int n_x = state_dim();
    const Eigen::Index n_z = cfg_.noise.r_diag.size();
    NoiseSpec ns;
    ns.Q = cfg_.noise.q * Mat::Identity(n_x, n_x);
    ns.R = cfg_.noise.r_diag.asDiagonal().toDenseMatrix();
    if (n_z != static_cast<Eigen::Index>(meas_names_.size()))
        throw ConfigError("noise.r_diag length does not match the measurement dimension");
    return ns;
}

Dataset Experiment::synthesize(const DatasetSpec& spec, size_t index) const {
    if (!spec.profile) throw ConfigError("synthesize: no profile in dataset spec");
    if (!cfg_.truth)
        throw ConfigError("synthesize: config.truth (generating parameters) required");

    const ProfileSpec& prof = *spec.profile;
    Mat inputs;
    if (cfg_.model.kind == "battx") {
        inputs = generate_profile(prof, cfg_.model.capacity_ah);
    } else {
        // Toy model: map the c-rate band onto a small signed forcing input.
        Mat batt = generate_profile(prof, 1.0); // capacity 1 => I = -c_rate
        inputs.resize(batt.rows(), 1);
        const double mid = 0.5 * (prof.c_rate_min + prof.c_rate_max);
        for (Eigen::Index k = 0; k < batt.rows(); ++k)
            inputs(k, 0) = 0.08 * (-batt(k, 0) - mid);
    }

    Dataset ds;
    ds.dt = prof.dt;
    ds.label = spec.label;
    ds.inputs = inputs;

    const Model model = model_at(prof.dt);
    Vec x0;
    if (cfg_.model.kind == "battx")
        x0 = battx::initial_state(cfg_.model.battx_config(), cfg_.model.initial_soc,
                                  prof.ambient_k);
    else
        x0 = Vec::Constant(1, cfg_.model.logistic_x0);

    const NoiseSpec ns = noise();
    const uint64_t seed = spec.seed ? *spec.seed : derive_seed(cfg_.seed, 500 + index);
    const auto sim = simulate(model, x0, inputs, *cfg_.truth,
                              spec.noiseless ? nullptr : &ns, seed);
    ds.measurements = sim.measurements;
    ds.validate();
    return ds;
}

std::vector<BoundDataset> Experiment::materialize(
    const std::vector<DatasetSpec>& specs) const {
    std::vector<BoundDataset> out;
    for (size_t i = 0; i < specs.size(); ++i) {
        BoundDataset b;
        b.data = specs[i].path.empty() ? synthesize(specs[i], i)
                                       : read_dataset_csv(specs[i].path);
        b.model = model_at(b.data.dt);
        if (b.data.input_dim() != b.model.input_dim ||
            b.data.meas_dim() != b.model.meas_dim)
            throw ConfigError("dataset '" + b.data.label +
                              "' dimensions do not match the model");
        b.x0 = x0_for(b.data);
        out.push_back(std::move(b));
    }
    return out;
}

LikelihoodFn Experiment::make_likelihood(
    std::shared_ptr<const std::vector<BoundDataset>> data) const {
    if (!data || data->empty()) throw ConfigError("likelihood: no datasets");
    const LikelihoodBlock lk = cfg_.likelihood;
    const NoiseSpec ns = noise();
    return [data, lk, ns](const Vec& theta, uint64_t seed) -> double {
        const auto& sets = *data;
        std::vector<double> values(sets.size(), kNegInf);
        auto eval_one = [&](size_t m) {
            const uint64_t s = derive_seed(seed, m);
            const auto& b = sets[m];
            switch (lk.method) {
                case LikelihoodMethod::Uipf:
                    values[m] = uipf_log_likelihood(b.model, theta, b.data, b.x0, ns,
                                                    lk.cfg, lk.ut, s)
                                    .value;
                    break;
                case LikelihoodMethod::Apf:
                    values[m] = apf_log_likelihood(b.model, theta, b.data, b.x0, ns,
                                                   lk.cfg.num_particles, s, lk.cfg.floor)
                                    .value;
                    break;
                case LikelihoodMethod::Deterministic:
                    values[m] = deterministic_log_likelihood(b.model, theta, b.data, b.x0,
                                                             ns.R, s, lk.cfg.floor)
                                    .value;
                    break;
            }
        };
        if (lk.parallel_datasets && sets.size() > 1) {
            parallel_for(sets.size(), default_workers(),
                         [&](size_t m) { eval_one(m); });
        } else {
            for (size_t m = 0; m < sets.size(); ++m) eval_one(m);
        }
        double total = 0.0;
        for (double v : values) {
            if (!std::isfinite(v)) return kNegInf;
            total += v;
        }
        return total;
    };
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace,
                     const ParameterSpace& space) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + path.string() + "' for writing");
    f << "eval_index,phase,L,best_so_far";
    for (Eigen::Index i = 0; i < space.dim(); ++i) f << ",theta_" << (i + 1);
    f << "\n";
    const auto best = trace.best_so_far();
    for (size_t i = 0; i < trace.entries.size(); ++i) {
        const auto& e = trace.entries[i];
        f << e.index << "," << to_string(e.phase) << "," << fmt17(e.value) << ","
          << fmt17(best[i]);
        for (Eigen::Index d = 0; d < e.theta.size(); ++d) f << "," << fmt17(e.theta[d]);
        f << "\n";
    }
}

json write_datasets(const Experiment& ex, const std::filesystem::path& outdir) {
    const auto& cfg = ex.config();
    std::filesystem::create_directories(outdir);
    json manifest = json::array();

    auto emit = [&](const std::vector<DatasetSpec>& specs, const std::string& role) {
        for (size_t i = 0; i < specs.size(); ++i) {
            const auto& spec = specs[i];
            if (!spec.path.empty()) {
                manifest.push_back(
                    json{{"role", role}, {"path", spec.path}, {"external", true}});
                continue;
            }
            const Dataset ds = ex.synthesize(spec, i);
            const auto csv_path = outdir / (ds.label + ".csv");
            write_dataset_csv(csv_path, ds, ex.input_names(), ex.meas_names());

            json sidecar;
            sidecar["label"] = ds.label;
            sidecar["role"] = role;
            sidecar["seed"] = spec.seed ? *spec.seed : derive_seed(cfg.seed, 500 + i);
            sidecar["noiseless"] = spec.noiseless;
            sidecar["noise"] = json{{"q", cfg.noise.q},
                                    {"r_diag", json(std::vector<double>(
                                                   cfg.noise.r_diag.data(),
                                                   cfg.noise.r_diag.data() +
                                                       cfg.noise.r_diag.size()))}};
            json theta;
            for (Eigen::Index d = 0; d < ex.space().dim(); ++d)
                theta[ex.space().names()[static_cast<size_t>(d)]] = (*cfg.truth)[d];
            sidecar["theta"] = theta;
            write_json(outdir / (ds.label + ".truth.json"), sidecar);

            manifest.push_back(json{{"role", role},
                                    {"file", csv_path.filename().string()},
                                    {"rows", ds.length()},
                                    {"dt", ds.dt}});
        }
    };
    emit(cfg.datasets, "identification");
    emit(cfg.validation_datasets, "validation");

    json out{{"datasets", manifest}};
    write_json(outdir / "datasets.json", out);
    return out;
}

namespace {

/// Generating parameters for scoring: the config's inline truth when given,
/// otherwise the first dataset sidecar (<csv path minus extension>.truth.json).
std::optional<Vec> resolve_truth(const Experiment& ex) {
    const auto& cfg = ex.config();
    if (cfg.truth) return cfg.truth;
    for (const auto& spec : cfg.datasets) {
        if (spec.path.empty()) continue;
        std::filesystem::path sidecar(spec.path);
        sidecar.replace_extension(".truth.json");
        std::ifstream f(sidecar);
        if (!f) continue;
        json j;
        try {
            f >> j;
        } catch (const json::exception&) {
            continue;
        }
        if (!j.contains("theta")) continue;
        Vec truth(ex.space().dim());
        bool complete = true;
        for (Eigen::Index i = 0; i < ex.space().dim(); ++i) {
            const auto& name = ex.space().names()[static_cast<size_t>(i)];
            if (!j["theta"].contains(name)) {
                complete = false;
                break;
            }
            truth[i] = j["theta"][name].get<double>();
        }
        if (complete) return truth;
    }
    return std::nullopt;
}

} // namespace

json run_identification(const Experiment& ex, const std::filesystem::path& outdir) {
    const auto& cfg = ex.config();
    if (cfg.datasets.empty()) throw ConfigError("identify: config.datasets is empty");
    std::filesystem::create_directories(outdir);

    auto data = std::make_shared<const std::vector<BoundDataset>>(
        ex.materialize(cfg.datasets));
    const LikelihoodFn fn = ex.make_likelihood(data);

    SchedulerConfig sched = cfg.scheduler;
    sched.seed = cfg.seed;
    const RunResult res =
        run_optimizer(cfg.optimizer, ex.space(), fn, sched, cfg.gp, cfg.nelder_mead);

    // Rescore the winner and (when known) the generating parameters with a
    // common seed so the two are comparable.
    const uint64_t score_seed = derive_seed(cfg.seed, kTruthScoreStream);
    const double l_hat_rescored = fn(res.theta_star, score_seed);
    const std::optional<Vec> truth = resolve_truth(ex);
    std::optional<double> l_true;
    if (truth) l_true = fn(*truth, score_seed);

    json report;
    report["optimizer"] = to_string(cfg.optimizer);
    report["seed"] = cfg.seed;
    report["likelihood"] = json{{"method", to_string(cfg.likelihood.method)},
                                {"num_particles", cfg.likelihood.cfg.num_particles}};
    report["evaluations"] = res.trace.entries.size();
    long infeasible_evals = 0;
    for (const auto& e : res.trace.entries)
        if (!std::isfinite(e.value)) ++infeasible_evals;
    report["infeasible_evaluations"] = infeasible_evals;
    report["L_hat"] = jnum(res.l_star);
    report["L_hat_rescored"] = jnum(l_hat_rescored);
    if (l_true) report["L_true"] = jnum(*l_true);

    json theta_hat;
    const auto& names = ex.space().names();
    for (Eigen::Index i = 0; i < ex.space().dim(); ++i)
        theta_hat[names[static_cast<size_t>(i)]] = res.theta_star[i];
    report["theta_hat"] = theta_hat;

    json params = json::array();
    for (Eigen::Index i = 0; i < ex.space().dim(); ++i) {
        json p;
        p["name"] = names[static_cast<size_t>(i)];
        p["unit"] = ex.space().units()[static_cast<size_t>(i)];
        p["lower"] = ex.space().lower()[i];
        p["upper"] = ex.space().upper()[i];
        p["estimate"] = res.theta_star[i];
        if (truth) {
            const double t = (*truth)[i];
            p["truth"] = t;
            p["abs_error"] = std::abs(res.theta_star[i] - t);
            if (t != 0.0) p["rel_error"] = std::abs(res.theta_star[i] - t) / std::abs(t);
        }
        params.push_back(p);
    }
    report["parameters"] = params;

    json switches = json::array();
    for (const auto& s : res.trace.switches)
        switches.push_back(json{{"eval_index", s.eval_index},
                                {"from", s.from},
                                {"to", s.to},
                                {"reason", s.reason},
                                {"rank", s.rank},
                                {"pool_size", s.pool_size}});
    report["switch_events"] = switches;

    json labels = json::array();
    for (const auto& b : *data) labels.push_back(b.data.label);
    report["datasets"] = labels;

    write_json(outdir / "report.json", report);
    write_trace_csv(outdir / "trace.csv", res.trace, ex.space());
    return report;
}

json validate_model(const Experiment& ex, const Vec& theta,
                    const std::filesystem::path& outdir) {
    const auto& cfg = ex.config();
    const auto& specs =
        cfg.validation_datasets.empty() ? cfg.datasets : cfg.validation_datasets;
    if (specs.empty()) throw ConfigError("validate: no datasets configured");
    std::filesystem::create_directories(outdir);

    const auto bound = ex.materialize(specs);
    const bool is_battx = cfg.model.kind == "battx";

    std::vector<std::string> header{"dataset"};
    if (is_battx) {
        header.push_back("voltage_rmse_V");
        header.push_back("temperature_rmse_K");
    } else {
        for (const auto& n : ex.meas_names()) header.push_back("rmse_" + n);
    }

    json out;
    json rows = json::array();
    std::string csv_text;
    for (size_t i = 0; i < header.size(); ++i)
        csv_text += (i ? "," : "") + header[i];
    csv_text += "\n";

    for (const auto& b : bound) {
        const auto sim = simulate(b.model, b.x0, b.data.inputs, theta, nullptr, 0);
        const Mat resid = b.data.measurements - sim.measurements;
        Vec rmse(resid.cols());
        for (Eigen::Index c = 0; c < resid.cols(); ++c)
            rmse[c] = std::sqrt(resid.col(c).squaredNorm() /
                                static_cast<double>(resid.rows()));

        // residual table: t plus one column per measurement channel
        std::vector<std::string> rhdr{"t"};
        for (const auto& n : ex.meas_names()) rhdr.push_back("resid_" + n);
        Mat rtab(resid.rows(), resid.cols() + 1);
        for (Eigen::Index k = 0; k < resid.rows(); ++k)
            rtab(k, 0) = static_cast<double>(k + 1) * b.data.dt;
        rtab.rightCols(resid.cols()) = resid;
        write_table_csv(outdir / (b.data.label + "_residuals.csv"), rhdr, rtab);

        csv_text += b.data.label;
        for (Eigen::Index c = 0; c < rmse.size(); ++c)
            csv_text += "," + fmt17(rmse[c]);
        csv_text += "\n";

        json row;
        row["dataset"] = b.data.label;
        if (is_battx) {
            row["voltage_rmse_V"] = jnum(rmse[0]);
            row["temperature_rmse_K"] = jnum(rmse[1]);
        } else {
            for (Eigen::Index c = 0; c < rmse.size(); ++c)
                row["rmse_" + ex.meas_names()[static_cast<size_t>(c)]] = jnum(rmse[c]);
        }
        rows.push_back(row);
    }
    write_text(outdir / "validation.csv", csv_text);

    json theta_j;
    for (Eigen::Index i = 0; i < ex.space().dim(); ++i)
        theta_j[ex.space().names()[static_cast<size_t>(i)]] = theta[i];
    out["theta"] = theta_j;
    out["results"] = rows;
    write_json(outdir / "validation.json", out);
    return out;
}

json filter_comparison(const Experiment& ex, const std::filesystem::path& outdir) {
    const auto& cfg = ex.config();
    if (cfg.datasets.empty())
        throw ConfigError("compare-filters: config.datasets is empty");
    if (!cfg.truth)
        throw ConfigError("compare-filters: config.truth required (evaluation point)");
    std::filesystem::create_directories(outdir);

    const auto bound = ex.materialize({cfg.datasets.front()});
    const auto& b = bound.front();
    const NoiseSpec ns = ex.noise();
    const Vec theta = *cfg.truth;
    const auto& fc = cfg.filter_comparison;

    struct Cell {
        std::string method;
        int np;
        std::vector<double> values;
    };
    std::vector<Cell> cells;
    for (auto method : fc.methods)
        for (int np : fc.particle_grid)
            cells.push_back({to_string(method), np, {}});

    for (size_t c = 0; c < cells.size(); ++c) {
        auto& cell = cells[c];
        cell.values.assign(static_cast<size_t>(fc.replications), 0.0);
        const LikelihoodMethod method = likelihood_method_from_string(cell.method);
        LikelihoodConfig lk = cfg.likelihood.cfg;
        lk.num_particles = cell.np;
        parallel_for(cell.values.size(), default_workers(), [&](size_t rep) {
            const uint64_t seed =
                derive_seed(cfg.seed, 1000 + c * 100000 + rep);
            switch (method) {
                case LikelihoodMethod::Uipf:
                    cell.values[rep] = uipf_log_likelihood(b.model, theta, b.data, b.x0,
                                                           ns, lk, cfg.likelihood.ut, seed)
                                           .value;
                    break;
                case LikelihoodMethod::Apf:
                    cell.values[rep] = apf_log_likelihood(b.model, theta, b.data, b.x0,
                                                          ns, cell.np, seed, lk.floor)
                                          .value;
                    break;
                case LikelihoodMethod::Deterministic:
                    cell.values[rep] = deterministic_log_likelihood(b.model, theta,
                                                                    b.data, b.x0, ns.R,
                                                                    seed, lk.floor)
                                           .value;
                    break;
            }
        });
    }

    std::vector<std::string> header{"method", "num_particles", "replications",
                                    "mean",   "std",           "q05",
                                    "q25",    "q50",           "q75",
                                    "q95"};
    std::string csv_text;
    for (size_t i = 0; i < header.size(); ++i) csv_text += (i ? "," : "") + header[i];
    csv_text += "\n";

    json rows = json::array();
    for (const auto& cell : cells) {
        const auto& v = cell.values;
        const double n = static_cast<double>(v.size());
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= n;
        double sd = 0.0;
        if (v.size() > 1) {
            for (double x : v) sd += (x - mean) * (x - mean);
            sd = std::sqrt(sd / (n - 1.0));
        }
        const auto qs = quantiles(v, {0.05, 0.25, 0.5, 0.75, 0.95});

        csv_text += cell.method + "," + std::to_string(cell.np) + "," +
                    std::to_string(v.size()) + "," + fmt17(mean) + "," + fmt17(sd);
        for (double q : qs) csv_text += "," + fmt17(q);
        csv_text += "\n";

        rows.push_back(json{{"method", cell.method},
                            {"num_particles", cell.np},
                            {"replications", v.size()},
                            {"mean", jnum(mean)},
                            {"std", jnum(sd)},
                            {"q05", jnum(qs[0])},
                            {"q25", jnum(qs[1])},
                            {"q50", jnum(qs[2])},
                            {"q75", jnum(qs[3])},
                            {"q95", jnum(qs[4])}});
    }
    write_text(outdir / "filter_comparison.csv", csv_text);
    json out{{"dataset", b.data.label}, {"cells", rows}};
    write_json(outdir / "filter_comparison.json", out);
    return out;
}

json optimizer_comparison(const Experiment& ex, const std::filesystem::path& outdir) {
    const auto& cfg = ex.config();
    if (cfg.datasets.empty())
        throw ConfigError("compare-optimizers: config.datasets is empty");
    std::filesystem::create_directories(outdir);

    auto data = std::make_shared<const std::vector<BoundDataset>>(
        ex.materialize(cfg.datasets));
    const LikelihoodFn fn = ex.make_likelihood(data);
    const auto& oc = cfg.optimizer_comparison;
    const long budget = cfg.scheduler.eval_budget;

    struct Run {
        size_t opt;
        int rep;
        std::vector<double> best;
    };
    std::vector<Run> runs;
    for (size_t o = 0; o < oc.optimizers.size(); ++o)
        for (int r = 0; r < oc.replications; ++r) runs.push_back({o, r, {}});

    parallel_for(runs.size(), default_workers(), [&](size_t i) {
        auto& run = runs[i];
        SchedulerConfig sched = cfg.scheduler;
        sched.seed = derive_seed(cfg.seed, 2000 + run.opt * 1000 + static_cast<size_t>(run.rep));
        const RunResult res = run_optimizer(oc.optimizers[run.opt], ex.space(), fn, sched,
                                            cfg.gp, cfg.nelder_mead);
        run.best = res.trace.best_so_far();
        run.best.resize(static_cast<size_t>(budget),
                        run.best.empty() ? kNegInf : run.best.back());
    });

    // eval_index column plus mean/std per optimizer
    const size_t n_opt = oc.optimizers.size();
    Mat table(budget, 1 + 2 * static_cast<Eigen::Index>(n_opt));
    for (long k = 0; k < budget; ++k) table(k, 0) = static_cast<double>(k + 1);
    std::vector<std::string> header{"eval_index"};
    json summary = json::array();
    for (size_t o = 0; o < n_opt; ++o) {
        const std::string name = to_string(oc.optimizers[o]);
        header.push_back(name + "_mean");
        header.push_back(name + "_std");
        for (long k = 0; k < budget; ++k) {
            double mean = 0.0;
            int count = 0;
            for (const auto& run : runs)
                if (run.opt == o) {
                    mean += run.best[static_cast<size_t>(k)];
                    ++count;
                }
            mean /= std::max(1, count);
            double sd = 0.0;
            if (count > 1) {
                for (const auto& run : runs)
                    if (run.opt == o) {
                        const double d = run.best[static_cast<size_t>(k)] - mean;
                        sd += d * d;
                    }
                sd = std::sqrt(sd / (count - 1));
            }
            table(k, 1 + 2 * static_cast<Eigen::Index>(o)) = mean;
            table(k, 2 + 2 * static_cast<Eigen::Index>(o)) = sd;
        }
        summary.push_back(json{{"optimizer", name},
                               {"replications", oc.replications},
                               {"terminal_mean", jnum(table(budget - 1,
                                                            1 + 2 * static_cast<Eigen::Index>(o)))},
                               {"terminal_std", jnum(table(budget - 1,
                                                           2 + 2 * static_cast<Eigen::Index>(o)))}});
    }
    write_table_csv(outdir / "optimizer_comparison.csv", header, table);
    json out{{"summary", summary}};
    write_json(outdir / "optimizer_comparison.json", out);
    return out;
}

Vec resolve_validation_theta(const Experiment& ex) {
    const auto& cfg = ex.config();
    if (!cfg.validate) throw ConfigError("validate: config.validate block required");
    if (cfg.validate->theta) return *cfg.validate->theta;

    std::ifstream f(cfg.validate->theta_from_report);
    if (!f)
        throw ConfigError("validate: cannot open report '" +
                          cfg.validate->theta_from_report + "'");
    json report;
    try {
        f >> report;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("validate: report parse error: ") + e.what());
    }
    if (!report.contains("theta_hat"))
        throw ConfigError("validate: report has no theta_hat");
    Vec theta(ex.space().dim());
    for (Eigen::Index i = 0; i < ex.space().dim(); ++i) {
        const auto& name = ex.space().names()[static_cast<size_t>(i)];
        if (!report["theta_hat"].contains(name))
            throw ConfigError("validate: report theta_hat missing '" + name + "'");
        theta[i] = report["theta_hat"][name].get<double>();
    }
    return theta;
}

} // namespace ssmid::harness
