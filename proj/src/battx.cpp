#include "ssmid/battx.hpp"

#include <cmath>

#include "ssmid/rk4.hpp"

namespace ssmid::battx {

Params Params::from_vector(const Vec& theta) {
    if (theta.size() != kNumParams)
        throw ConfigError("battx: parameter vector must have 18 entries");
    Params p;
    p.c_s1 = theta[0];
    p.r_s1 = theta[1];
    p.c_e = theta[2];
    p.r_e = theta[3];
    p.c_core = theta[4];
    p.c_surf = theta[5];
    p.r_core = theta[6];
    p.r_surf = theta[7];
    p.beta1 = theta[8];
    p.beta2 = theta[9];
    p.gamma1 = theta[10];
    p.gamma2 = theta[11];
    p.gamma3 = theta[12];
    p.kappa1 = theta[13];
    p.kappa2 = theta[14];
    p.c1 = theta[15];
    p.c2 = theta[16];
    p.c3 = theta[17];
    return p;
}

Vec Params::to_vector() const {
    Vec v(kNumParams);
    v << c_s1, r_s1, c_e, r_e, c_core, c_surf, r_core, r_surf, beta1, beta2,
        gamma1, gamma2, gamma3, kappa1, kappa2, c1, c2, c3;
    return v;
}

const std::vector<std::string>& param_names() {
    static const std::vector<std::string> names = {
        "C_s1", "R_s1", "C_e",    "R_e",    "C_core", "C_surf",
        "R_core", "R_surf", "beta1",  "beta2",  "gamma1", "gamma2",
        "gamma3", "kappa1", "kappa2", "c1",     "c2",     "c3"};
    return names;
}

const std::vector<std::string>& param_units() {
    static const std::vector<std::string> units = {
        "F", "ohm", "F", "ohm", "J/K", "J/K", "K/W", "K/W", "-",
        "-", "ohm", "ohm", "ohm", "K",  "K",  "V/K", "V/K", "V/K"};
    return units;
}

ParameterSpace default_space() {
    Vec lo(kNumParams), hi(kNumParams);
    lo << 2000, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -0.1, 0, 0, 0, -0.001, 0, -0.01;
    hi << 5000, 0.5, 5000, 0.1, 100, 50, 10, 10, 1, 1, 0.1, 0, 0.1, 100, 100, 0, 0.01, 0;
    return ParameterSpace(param_names(), lo, hi, param_units());
}

Params nominal_params() {
    Params p;
    p.c_s1 = 4521.0;
    p.r_s1 = 0.114;
    p.c_e = 3691.0;
    p.r_e = 0.007;
    p.c_core = 40.0;
    p.c_surf = 10.0;
    p.r_core = 2.0;
    p.r_surf = 3.0;
    p.beta1 = 0.789;
    p.beta2 = 0.317;
    p.gamma1 = 0.046;
    p.gamma2 = -0.035;
    p.gamma3 = 0.029;
    p.kappa1 = 30.0;
    p.kappa2 = 70.0;
    p.c1 = -0.0004;
    p.c2 = 0.002;
    p.c3 = -0.001;
    return p;
}

Config Config::uniform(int n_nodes) {
    Config cfg;
    cfg.n_nodes = n_nodes;
    cfg.eta = Vec::Ones(n_nodes);
    cfg.sigma = Vec::Ones(n_nodes - 1);
    cfg.validate();
    return cfg;
}

void Config::validate() const {
    if (n_nodes < 2) throw ConfigError("battx: chain length N must be >= 2");
    if (eta.size() != n_nodes || sigma.size() != n_nodes - 1)
        throw ConfigError("battx: eta needs N entries and sigma N-1 entries");
    if (eta[0] != 1.0 || sigma[0] != 1.0)
        throw ConfigError("battx: eta[0] and sigma[0] must both be 1");
    if ((eta.array() <= 0.0).any() || (sigma.array() <= 0.0).any())
        throw ConfigError("battx: all node ratios must be positive");
    if (!(t_ref > 0.0)) throw ConfigError("battx: T_ref must be positive");
}

State State::from_flat(const Vec& x, const Config& cfg) {
    const int n = cfg.n_nodes;
    if (x.size() != cfg.state_dim())
        throw ConfigError("battx: state vector has wrong dimension");
    State s;
    s.v_s = x.head(n);
    s.v_e = x.segment(n, 3);
    s.t_core = x[n + 3];
    s.t_surf = x[n + 4];
    return s;
}

Vec State::to_flat() const {
    Vec x(v_s.size() + 5);
    x.head(v_s.size()) = v_s;
    x.segment(v_s.size(), 3) = v_e;
    x[v_s.size() + 3] = t_core;
    x[v_s.size() + 4] = t_surf;
    return x;
}

Vec initial_state(const Config& cfg, double soc0, double t_amb) {
    Vec x = Vec::Zero(cfg.state_dim());
    x.head(cfg.n_nodes).setConstant(soc0);
    x[cfg.n_nodes + 3] = t_amb;
    x[cfg.n_nodes + 4] = t_amb;
    return x;
}

double soc(const Vec& x, const Config& cfg, const Params& p) {
    const int n = cfg.n_nodes;
    // C_{s,i} = eta_i * C_s1; the common C_s1 factor cancels.
    (void)p;
    const double num = (cfg.eta.array() * x.head(n).array()).sum();
    return num / cfg.eta.sum();
}

namespace {

inline double arrhenius(double kappa, double t_core, double t_ref) {
    return std::exp(kappa * (1.0 / t_core - 1.0 / t_ref));
}

} // namespace

double diffusion_resistance(int i, double t_core, const Params& p, const Config& cfg) {
    if (i < 1 || i > cfg.n_nodes - 1)
        throw ConfigError("battx: chain resistance index out of range");
    if (!(t_core > 0.0))
        throw DomainError("diffusion_resistance", "T_core must be positive");
    return cfg.sigma[i - 1] * p.r_s1 * arrhenius(p.kappa2, t_core, cfg.t_ref);
}

double internal_resistance(double soc, double t_core, const Params& p, const Config& cfg) {
    if (!(t_core > 0.0))
        throw DomainError("internal_resistance", "T_core must be positive");
    const double r_o = p.gamma1 + p.gamma2 * soc + p.gamma3 * soc * soc;
    if (!(r_o > 0.0))
        throw DomainError("internal_resistance",
                          "non-positive resistance polynomial at soc=" + std::to_string(soc));
    return r_o * arrhenius(p.kappa1, t_core, cfg.t_ref);
}

double entropic_coefficient(double soc, const Params& p) {
    return p.c1 + p.c2 * soc + p.c3 * soc * soc;
}

double electrolyte_overpotential(double v_e1, double v_e3, const Params& p) {
    const double a = v_e1 + p.beta2;
    const double b = v_e3 + p.beta2;
    if (!(a > 0.0) || !(b > 0.0))
        throw DomainError("electrolyte_overpotential",
                          "beta2 too small for electrolyte state (log domain)");
    return p.beta1 * std::log(a / b);
}

double terminal_voltage(const Vec& x, double current, const Params& p, const Config& cfg) {
    const int n = cfg.n_nodes;
    const double s = soc(x, cfg, p);
    const double u_s = cfg.ocv(x[0]); // OCV evaluated at the first node voltage
    const double u_e = electrolyte_overpotential(x[n], x[n + 2], p);
    const double r_ot = internal_resistance(s, x[n + 3], p, cfg);
    return u_s + u_e + r_ot * current;
}

double heat_rate(const Vec& x, double current, const Params& p, const Config& cfg) {
    const int n = cfg.n_nodes;
    const double s = soc(x, cfg, p);
    const double v = terminal_voltage(x, current, p, cfg);
    const double t_core = x[n + 3];
    return current * (v - cfg.ocv(s)) + current * t_core * entropic_coefficient(s, p);
}

Vec derivatives(const Vec& x, const Vec& u, const Params& p, const Config& cfg) {
    const int n = cfg.n_nodes;
    const double current = u[0];
    const double t_amb = u[1];
    const double t_core = x[n + 3];
    const double t_surf = x[n + 4];

    Vec dx(cfg.state_dim());

    // Electrode diffusion chain. R_{s,i,T} shares one Arrhenius factor.
    const double arr = [&] {
        if (!(t_core > 0.0))
            throw DomainError("diffusion_resistance", "T_core must be positive");
        return arrhenius(p.kappa2, t_core, cfg.t_ref);
    }();
    auto r_chain = [&](int i) { return cfg.sigma[i - 1] * p.r_s1 * arr; }; // i in 1..N-1
    auto c_node = [&](int i) { return cfg.eta[i - 1] * p.c_s1; };          // i in 1..N

    dx[0] = (x[1] - x[0]) / (c_node(1) * r_chain(1)) + current / c_node(1);
    for (int i = 2; i <= n - 1; ++i) {
        dx[i - 1] = (x[i - 2] - x[i - 1]) / (c_node(i) * r_chain(i - 1)) +
                    (x[i] - x[i - 1]) / (c_node(i) * r_chain(i));
    }
    dx[n - 1] = (x[n - 2] - x[n - 1]) / (c_node(n) * r_chain(n - 1));

    // Electrolyte chain (3 nodes, source +I at node 1, sink -I at node 3).
    const double ce_re = p.c_e * p.r_e;
    dx[n + 0] = (x[n + 1] - x[n + 0]) / ce_re + current / p.c_e;
    dx[n + 1] = (x[n + 0] - 2.0 * x[n + 1] + x[n + 2]) / ce_re;
    dx[n + 2] = (x[n + 1] - x[n + 2]) / ce_re - current / p.c_e;

    // Two-node thermal model driven by the heat generation rate.
    const double q_dot = heat_rate(x, current, p, cfg);
    dx[n + 3] = q_dot / p.c_core + (t_surf - t_core) / (p.r_core * p.c_core);
    dx[n + 4] = (t_amb - t_surf) / (p.r_surf * p.c_surf) -
                (t_surf - t_core) / (p.r_core * p.c_surf);
    return dx;
}

StepResult step(const Vec& x, const Vec& u, const Params& p, const Config& cfg, double dt) {
    Vec next = rk4_step(
        [&](const Vec& xs, const Vec& us, const Vec&) {
            return derivatives(xs, us, p, cfg);
        },
        x, u, Vec(), dt);
    StepResult out;
    const int n = cfg.n_nodes;
    out.saturated = (next.head(n).array() < 0.0).any() ||
                    (next.head(n).array() > 1.0).any();
    next.head(n) = next.head(n).cwiseMax(0.0).cwiseMin(1.0);
    out.x = std::move(next);
    return out;
}

Model make_model(const Config& cfg, double dt) {
    cfg.validate();
    Model m;
    m.state_dim = cfg.state_dim();
    m.input_dim = 2;
    m.meas_dim = 2;
    m.transition = [cfg, dt](const Vec& x, const Vec& u, const Vec& theta) {
        return step(x, u, Params::from_vector(theta), cfg, dt).x;
    };
    m.measurement = [cfg](const Vec& x, const Vec& u, const Vec& theta) {
        Vec z(2);
        z[0] = terminal_voltage(x, u[0], Params::from_vector(theta), cfg);
        z[1] = x[cfg.n_nodes + 4];
        return z;
    };
    return m;
}

} // namespace ssmid::battx
