#include "ssmid/harness/config.hpp"

#include <fstream>
#include <set>

#include "ssmid/toy_models.hpp"

namespace ssmid::harness {

namespace {

/// Strict object reader: every key must be consumed, unknown keys are
/// rejected with their full path.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    const json& raw(const std::string& k) {
        mark(k);
        if (!j_.contains(k)) throw ConfigError(path_ + "." + k + ": missing");
        return j_.at(k);
    }

    template <typename T>
    T require(const std::string& k) {
        return convert<T>(raw(k), k);
    }

    template <typename T>
    T get(const std::string& k, T fallback) {
        mark(k);
        if (!j_.contains(k)) return fallback;
        return convert<T>(j_.at(k), k);
    }

    std::optional<ObjectReader> child(const std::string& k) {
        mark(k);
        if (!j_.contains(k)) return std::nullopt;
        return ObjectReader(j_.at(k), path_ + "." + k);
    }

    void finish() const {
        for (const auto& item : j_.items())
            if (!seen_.contains(item.key()))
                throw ConfigError(path_ + ": unknown key '" + item.key() + "'");
    }

    const std::string& path() const { return path_; }

private:
    void mark(const std::string& k) { seen_.insert(k); }

    template <typename T>
    T convert(const json& v, const std::string& k) {
        try {
            return v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path_ + "." + k + ": " + e.what());
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Vec to_vec(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    Vec v(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(where + ": expected numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

json from_vec(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

ProfileSpec parse_profile(ObjectReader r) {
    ProfileSpec p;
    p.kind = r.require<std::string>("kind");
    p.c_rate = r.get<double>("c_rate", p.c_rate);
    p.c_rate_min = r.get<double>("c_rate_min", p.c_rate_min);
    p.c_rate_max = r.get<double>("c_rate_max", p.c_rate_max);
    p.ambient_k = r.get<double>("ambient_K", p.ambient_k);
    p.duration_s = r.get<double>("duration_s", p.duration_s);
    p.dt = r.get<double>("dt", p.dt);
    p.seed = r.get<uint64_t>("seed", p.seed);
    r.finish();
    p.validate();
    return p;
}

json profile_to_json(const ProfileSpec& p) {
    return json{{"kind", p.kind},         {"c_rate", p.c_rate},
                {"c_rate_min", p.c_rate_min}, {"c_rate_max", p.c_rate_max},
                {"ambient_K", p.ambient_k},   {"duration_s", p.duration_s},
                {"dt", p.dt},             {"seed", p.seed}};
}

DatasetSpec parse_dataset(ObjectReader r) {
    DatasetSpec d;
    d.path = r.get<std::string>("path", "");
    if (r.has("synthesize")) {
        auto s = *r.child("synthesize");
        d.label = s.get<std::string>("label", "synthetic");
        d.profile = parse_profile(*s.child("profile"));
        d.noiseless = s.get<bool>("noiseless", false);
        if (s.has("seed")) d.seed = s.require<uint64_t>("seed");
        s.finish();
    }
    r.finish();
    if (d.path.empty() && !d.profile)
        throw ConfigError("dataset spec needs 'path' or 'synthesize'");
    if (!d.path.empty() && d.profile)
        throw ConfigError("dataset spec cannot have both 'path' and 'synthesize'");
    return d;
}

json dataset_to_json(const DatasetSpec& d) {
    if (!d.path.empty()) return json{{"path", d.path}};
    json s{{"label", d.label}, {"profile", profile_to_json(*d.profile)},
           {"noiseless", d.noiseless}};
    if (d.seed) s["seed"] = *d.seed;
    return json{{"synthesize", s}};
}

} // namespace

void ProfileSpec::validate() const {
    if (kind != "constant_crate" && kind != "random_walk")
        throw ConfigError("profile: kind must be constant_crate or random_walk");
    auto in_range = [](double c) { return c >= 0.0 && c <= 5.0; };
    if (kind == "constant_crate" && !in_range(c_rate))
        throw ConfigError("profile: c_rate must be within [0, 5]");
    if (kind == "random_walk" &&
        (!in_range(c_rate_min) || !in_range(c_rate_max) || c_rate_min > c_rate_max))
        throw ConfigError("profile: c-rate bounds must satisfy 0 <= min <= max <= 5");
    if (!(duration_s > 0.0)) throw ConfigError("profile: duration must be positive");
    if (!(dt > 0.0)) throw ConfigError("profile: dt must be positive");
    if (!(ambient_k > 0.0)) throw ConfigError("profile: ambient must be positive kelvin");
}

battx::Config ModelConfig::battx_config() const {
    battx::Config cfg;
    cfg.n_nodes = n_nodes;
    cfg.eta = eta ? *eta : Vec::Ones(n_nodes);
    cfg.sigma = sigma ? *sigma : Vec::Ones(n_nodes - 1);
    cfg.t_ref = t_ref;
    if (ocv_knots) cfg.ocv = OcvCurve(*ocv_knots);
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    ObjectReader root(j, "config");
    c.seed = root.get<uint64_t>("seed", 0);
    c.output_dir = root.get<std::string>("output_dir", "out");

    {
        auto m = root.child("model");
        if (!m) throw ConfigError("config.model: missing");
        c.model.kind = m->require<std::string>("kind");
        if (c.model.kind != "battx" && c.model.kind != "logistic")
            throw ConfigError("config.model.kind must be 'battx' or 'logistic'");
        c.model.n_nodes = m->get<int>("n_nodes", 5);
        if (m->has("eta")) c.model.eta = to_vec(m->raw("eta"), m->path() + ".eta");
        if (m->has("sigma")) c.model.sigma = to_vec(m->raw("sigma"), m->path() + ".sigma");
        c.model.t_ref = m->get<double>("t_ref", 298.0);
        if (m->has("ocv_knots")) {
            std::vector<std::pair<double, double>> knots;
            for (const auto& k : m->raw("ocv_knots")) {
                if (!k.is_array() || k.size() != 2)
                    throw ConfigError("config.model.ocv_knots: expected [soc, voltage] pairs");
                knots.emplace_back(k[0].get<double>(), k[1].get<double>());
            }
            c.model.ocv_knots = std::move(knots);
        }
        c.model.capacity_ah = m->get<double>("capacity_ah", 0.0);
        c.model.initial_soc = m->get<double>("initial_soc", 1.0);
        c.model.logistic_x0 = m->get<double>("logistic_x0", 0.5);
        m->finish();
    }

    if (auto s = root.child("parameter_space")) {
        auto names = s->require<std::vector<std::string>>("names");
        const Vec lo = to_vec(s->raw("lower"), "parameter_space.lower");
        const Vec hi = to_vec(s->raw("upper"), "parameter_space.upper");
        std::vector<std::string> units;
        if (s->has("units")) units = s->require<std::vector<std::string>>("units");
        s->finish();
        c.space = ParameterSpace(names, lo, hi, units);
    }
    const ParameterSpace space =
        c.space ? *c.space
                : (c.model.kind == "battx" ? battx::default_space() : logistic_space());

    if (root.has("truth")) {
        const json& t = root.raw("truth");
        if (!t.is_object()) throw ConfigError("config.truth: expected {name: value}");
        Vec truth(space.dim());
        std::set<std::string> found;
        for (const auto& item : t.items()) {
            const int idx = space.index_of(item.key());
            if (idx < 0)
                throw ConfigError("config.truth: unknown parameter '" + item.key() + "'");
            truth[idx] = item.value().get<double>();
            found.insert(item.key());
        }
        if (static_cast<Eigen::Index>(found.size()) != space.dim())
            throw ConfigError("config.truth: must set every parameter");
        c.truth = truth;
    }

    if (auto l = root.child("likelihood")) {
        c.likelihood.method =
            likelihood_method_from_string(l->get<std::string>("method", "uipf"));
        c.likelihood.cfg.num_particles = l->get<int>("num_particles", 100);
        c.likelihood.cfg.alpha_implicit = l->get<double>("alpha_implicit", 1e-4);
        c.likelihood.cfg.ess_fraction = l->get<double>("ess_fraction", 0.5);
        c.likelihood.cfg.jitter = l->get<double>("jitter", 1e-10);
        c.likelihood.cfg.prior_cov = l->get<double>("prior_cov", 1e-6);
        c.likelihood.cfg.floor = l->get<double>("floor", -1e8);
        if (auto u = l->child("ut")) {
            c.likelihood.ut.alpha = u->get<double>("alpha", 1e-3);
            c.likelihood.ut.beta = u->get<double>("beta", 2.0);
            c.likelihood.ut.kappa = u->get<double>("kappa", 0.0);
            u->finish();
        }
        c.likelihood.parallel_datasets = l->get<bool>("parallel_datasets", true);
        l->finish();
        c.likelihood.cfg.validate();
        c.likelihood.ut.validate();
    }

    if (auto n = root.child("noise")) {
        c.noise.q = n->get<double>("q", 1e-8);
        if (n->has("r_diag")) c.noise.r_diag = to_vec(n->raw("r_diag"), "noise.r_diag");
        n->finish();
    }
    if (c.noise.r_diag.size() == 0) {
        if (c.model.kind == "battx") {
            c.noise.r_diag = Vec(2);
            c.noise.r_diag << 1e-3, 1e-2;
        } else {
            c.noise.r_diag = Vec::Constant(1, 1e-4);
        }
    }

    if (auto g = root.child("gp")) {
        c.gp.kernel = kernel_family_from_string(g->get<std::string>("kernel", "matern52"));
        c.gp.train.n_starts = g->get<int>("n_starts", 3);
        c.gp.train.max_evals_per_start = g->get<long>("max_fit_evals", 150);
        c.gp.train.noise_floor = g->get<double>("noise_floor", 1e-8);
        c.gp.train.hyper_subsample = g->get<int>("hyper_subsample", 160);
        c.gp.refit_dense_until = g->get<int>("refit_dense_until", 100);
        c.gp.refit_interval = g->get<int>("refit_interval", 5);
        if (auto a = g->child("acquisition")) {
            c.gp.acq.n_starts = a->get<int>("n_starts", 32);
            c.gp.acq.n_polish = a->get<int>("n_polish", 32);
            c.gp.acq.polish_max_evals = a->get<long>("polish_max_evals", 60);
            c.gp.acq.polish_step = a->get<double>("polish_step", 0.05);
            a->finish();
        }
        g->finish();
    }

    if (auto n = root.child("nelder_mead")) {
        c.nelder_mead.reflection = n->get<double>("reflection", 1.0);
        c.nelder_mead.expansion = n->get<double>("expansion", 2.0);
        c.nelder_mead.contraction = n->get<double>("contraction", 0.5);
        c.nelder_mead.shrink = n->get<double>("shrink", 0.5);
        c.nelder_mead.no_improve_tol = n->get<double>("no_improve_tol", 1e-9);
        n->finish();
        c.nelder_mead.validate();
    }

    if (auto s = root.child("scheduler")) {
        c.scheduler.init_samples = s->get<int>("init_samples", 0);
        c.scheduler.top_m = s->get<int>("top_m", 3);
        c.scheduler.nm_patience = s->get<int>("nm_patience", 0);
        c.scheduler.bo_stagnation = s->get<int>("bo_stagnation", 10);
        c.scheduler.d_final = s->get<double>("d_final", 1e-3);
        c.scheduler.eval_budget = s->get<long>("eval_budget", 500);
        c.scheduler.rebaseline_d0 = s->get<bool>("rebaseline_d0", false);
        s->finish();
    }
    c.scheduler.seed = c.seed;

    c.optimizer = optimizer_kind_from_string(root.get<std::string>("optimizer", "accelerated"));

    if (root.has("datasets")) {
        const json& arr = root.raw("datasets");
        if (!arr.is_array()) throw ConfigError("config.datasets: expected an array");
        for (const auto& d : arr)
            c.datasets.push_back(parse_dataset(ObjectReader(d, "config.datasets[]")));
    }
    if (root.has("validation_datasets")) {
        const json& arr = root.raw("validation_datasets");
        if (!arr.is_array())
            throw ConfigError("config.validation_datasets: expected an array");
        for (const auto& d : arr)
            c.validation_datasets.push_back(
                parse_dataset(ObjectReader(d, "config.validation_datasets[]")));
    }

    if (auto v = root.child("validate")) {
        ValidateBlock vb;
        vb.theta_from_report = v->get<std::string>("theta_from_report", "");
        if (v->has("theta")) {
            const json& t = v->raw("theta");
            Vec theta(space.dim());
            std::set<std::string> found;
            for (const auto& item : t.items()) {
                const int idx = space.index_of(item.key());
                if (idx < 0)
                    throw ConfigError("config.validate.theta: unknown parameter '" +
                                      item.key() + "'");
                theta[idx] = item.value().get<double>();
                found.insert(item.key());
            }
            if (static_cast<Eigen::Index>(found.size()) != space.dim())
                throw ConfigError("config.validate.theta: must set every parameter");
            vb.theta = theta;
        }
        v->finish();
        if (vb.theta_from_report.empty() && !vb.theta)
            throw ConfigError("config.validate: needs theta_from_report or theta");
        c.validate = std::move(vb);
    }

    if (auto f = root.child("filter_comparison")) {
        c.filter_comparison.particle_grid =
            f->get<std::vector<int>>("particle_grid", {10, 100});
        c.filter_comparison.replications = f->get<int>("replications", 100);
        if (f->has("methods")) {
            c.filter_comparison.methods.clear();
            for (const auto& m : f->require<std::vector<std::string>>("methods"))
                c.filter_comparison.methods.push_back(likelihood_method_from_string(m));
        }
        f->finish();
    }

    if (auto o = root.child("optimizer_comparison")) {
        if (o->has("optimizers")) {
            c.optimizer_comparison.optimizers.clear();
            for (const auto& s : o->require<std::vector<std::string>>("optimizers"))
                c.optimizer_comparison.optimizers.push_back(optimizer_kind_from_string(s));
        }
        c.optimizer_comparison.replications = o->get<int>("replications", 20);
        o->finish();
    }

    root.finish();
    return c;
}

json RunConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["output_dir"] = output_dir;

    json m;
    m["kind"] = model.kind;
    m["n_nodes"] = model.n_nodes;
    if (model.eta) m["eta"] = from_vec(*model.eta);
    if (model.sigma) m["sigma"] = from_vec(*model.sigma);
    m["t_ref"] = model.t_ref;
    if (model.ocv_knots) {
        json knots = json::array();
        for (const auto& [s, v] : *model.ocv_knots) knots.push_back(json::array({s, v}));
        m["ocv_knots"] = knots;
    }
    m["capacity_ah"] = model.capacity_ah;
    m["initial_soc"] = model.initial_soc;
    m["logistic_x0"] = model.logistic_x0;
    j["model"] = m;

    const ParameterSpace sp =
        space ? *space : (model.kind == "battx" ? battx::default_space() : logistic_space());
    if (space) {
        j["parameter_space"] = json{{"names", space->names()},
                                    {"lower", from_vec(space->lower())},
                                    {"upper", from_vec(space->upper())},
                                    {"units", space->units()}};
    }
    if (truth) {
        json t;
        for (Eigen::Index i = 0; i < sp.dim(); ++i)
            t[sp.names()[static_cast<size_t>(i)]] = (*truth)[i];
        j["truth"] = t;
    }

    j["likelihood"] = json{{"method", to_string(likelihood.method)},
                           {"num_particles", likelihood.cfg.num_particles},
                           {"alpha_implicit", likelihood.cfg.alpha_implicit},
                           {"ess_fraction", likelihood.cfg.ess_fraction},
                           {"jitter", likelihood.cfg.jitter},
                           {"prior_cov", likelihood.cfg.prior_cov},
                           {"floor", likelihood.cfg.floor},
                           {"ut", json{{"alpha", likelihood.ut.alpha},
                                       {"beta", likelihood.ut.beta},
                                       {"kappa", likelihood.ut.kappa}}},
                           {"parallel_datasets", likelihood.parallel_datasets}};
    j["noise"] = json{{"q", noise.q}, {"r_diag", from_vec(noise.r_diag)}};
    j["gp"] = json{{"kernel", to_string(gp.kernel)},
                   {"n_starts", gp.train.n_starts},
                   {"max_fit_evals", gp.train.max_evals_per_start},
                   {"noise_floor", gp.train.noise_floor},
                   {"hyper_subsample", gp.train.hyper_subsample},
                   {"refit_dense_until", gp.refit_dense_until},
                   {"refit_interval", gp.refit_interval},
                   {"acquisition", json{{"n_starts", gp.acq.n_starts},
                                        {"n_polish", gp.acq.n_polish},
                                        {"polish_max_evals", gp.acq.polish_max_evals},
                                        {"polish_step", gp.acq.polish_step}}}};
    j["nelder_mead"] = json{{"reflection", nelder_mead.reflection},
                            {"expansion", nelder_mead.expansion},
                            {"contraction", nelder_mead.contraction},
                            {"shrink", nelder_mead.shrink},
                            {"no_improve_tol", nelder_mead.no_improve_tol}};
    j["scheduler"] = json{{"init_samples", scheduler.init_samples},
                          {"top_m", scheduler.top_m},
                          {"nm_patience", scheduler.nm_patience},
                          {"bo_stagnation", scheduler.bo_stagnation},
                          {"d_final", scheduler.d_final},
                          {"eval_budget", scheduler.eval_budget},
                          {"rebaseline_d0", scheduler.rebaseline_d0}};
    j["optimizer"] = to_string(optimizer);

    if (!datasets.empty()) {
        json arr = json::array();
        for (const auto& d : datasets) arr.push_back(dataset_to_json(d));
        j["datasets"] = arr;
    }
    if (!validation_datasets.empty()) {
        json arr = json::array();
        for (const auto& d : validation_datasets) arr.push_back(dataset_to_json(d));
        j["validation_datasets"] = arr;
    }
    if (validate) {
        json v;
        if (!validate->theta_from_report.empty())
            v["theta_from_report"] = validate->theta_from_report;
        if (validate->theta) {
            json t;
            for (Eigen::Index i = 0; i < sp.dim(); ++i)
                t[sp.names()[static_cast<size_t>(i)]] = (*validate->theta)[i];
            v["theta"] = t;
        }
        j["validate"] = v;
    }

    {
        json f;
        f["particle_grid"] = filter_comparison.particle_grid;
        f["replications"] = filter_comparison.replications;
        std::vector<std::string> methods;
        for (auto m : filter_comparison.methods) methods.push_back(to_string(m));
        f["methods"] = methods;
        j["filter_comparison"] = f;
    }
    {
        json o;
        std::vector<std::string> opts;
        for (auto k : optimizer_comparison.optimizers) opts.push_back(to_string(k));
        o["optimizers"] = opts;
        o["replications"] = optimizer_comparison.replications;
        j["optimizer_comparison"] = o;
    }
    return j;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path.string() + "'");
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in '" + path.string() + "': " + e.what());
    }
    return RunConfig::from_json(j);
}

} // namespace ssmid::harness
