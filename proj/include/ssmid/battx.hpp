#pragma once

#include "ssmid/model.hpp"
#include "ssmid/ocv.hpp"
#include "ssmid/types.hpp"

namespace ssmid::battx {

/// The 18 identifiable parameters of the BattX equivalent-circuit cell model,
/// in the canonical vector order given by param_names().
struct Params {
    double c_s1;    // electrode chain capacitance, first node [F]
    double r_s1;    // electrode chain resistance, first link [ohm]
    double c_e;     // electrolyte chain capacitance [F]
    double r_e;     // electrolyte chain resistance [ohm]
    double c_core;  // core thermal capacitance [J/K]
    double c_surf;  // surface thermal capacitance [J/K]
    double r_core;  // core-to-surface thermal resistance [K/W]
    double r_surf;  // surface-to-ambient thermal resistance [K/W]
    double beta1;   // electrolyte overpotential gain [-]
    double beta2;   // electrolyte overpotential offset [-]
    double gamma1, gamma2, gamma3; // internal resistance polynomial [ohm]
    double kappa1;  // internal-resistance Arrhenius coefficient [K]
    double kappa2;  // diffusion-resistance Arrhenius coefficient [K]
    double c1, c2, c3; // entropic coefficient polynomial [V/K]

    static Params from_vector(const Vec& theta);
    Vec to_vector() const;
};

inline constexpr int kNumParams = 18;

const std::vector<std::string>& param_names();
const std::vector<std::string>& param_units();

/// Search-range parameter space used by the shipped identification setups.
ParameterSpace default_space();

/// Reference cell parameterization used to synthesize data in the shipped
/// experiments.
Params nominal_params();

/// Structural configuration: chain length, node ratios, reference
/// temperature, OCV curve. Fixed (not identified).
struct Config {
    int n_nodes = 5;        // electrode chain length N (>= 2)
    Vec eta;                // N capacitance ratios, eta[0] == 1
    Vec sigma;              // N-1 resistance ratios, sigma[0] == 1
    double t_ref = 298.0;   // Arrhenius reference temperature [K]
    OcvCurve ocv = OcvCurve::synthetic_default();

    static Config uniform(int n_nodes = 5);
    void validate() const;

    int state_dim() const { return n_nodes + 5; }
};

/// Structured view of the flat state vector
/// [V_s(1..N), V_e(1..3), T_core, T_surf].
struct State {
    Vec v_s;       // electrode node voltages, normalized to [0,1]
    Vec v_e;       // 3 electrolyte node voltages
    double t_core; // [K]
    double t_surf; // [K]

    static State from_flat(const Vec& x, const Config& cfg);
    Vec to_flat() const;
};

/// Rest state at a given state of charge and ambient temperature:
/// all V_s at soc0, electrolyte relaxed, both temperatures at ambient.
Vec initial_state(const Config& cfg, double soc0, double t_amb);

// --- component equations ---------------------------------------------------

/// Capacitance-weighted mean of electrode node voltages, in [0,1].
double soc(const Vec& x, const Config& cfg, const Params& p);

/// Temperature-dependent chain resistance R_{s,i,T}, chain index i in [1, N-1].
double diffusion_resistance(int i, double t_core, const Params& p, const Config& cfg);

/// SoC- and temperature-dependent internal resistance R_{o,T}; the SoC
/// polynomial must evaluate positive.
double internal_resistance(double soc, double t_core, const Params& p, const Config& cfg);

/// dU_s/dT_core entropic polynomial.
double entropic_coefficient(double soc, const Params& p);

/// U_e = beta1 * ln((V_e1+beta2)/(V_e3+beta2)); both shifted nodes must be
/// positive.
double electrolyte_overpotential(double v_e1, double v_e3, const Params& p);

/// Terminal voltage V = U_s(V_s1) + U_e + R_{o,T} * I  (I < 0 discharging).
double terminal_voltage(const Vec& x, double current, const Params& p, const Config& cfg);

/// Heat generation rate: ohmic I*(V - U_s(SoC)) plus entropic I*T_core*dUs/dT.
double heat_rate(const Vec& x, double current, const Params& p, const Config& cfg);

/// Full right-hand side d/dt [V_s, V_e, T_core, T_surf] under input
/// u = (I, T_amb).
Vec derivatives(const Vec& x, const Vec& u, const Params& p, const Config& cfg);

struct StepResult {
    Vec x;
    bool saturated = false; // some V_s node was clamped to [0,1]
};

/// One RK4 step of the continuous dynamics followed by V_s clamping.
StepResult step(const Vec& x, const Vec& u, const Params& p, const Config& cfg, double dt);

/// Discrete-time state-space model at sampling interval dt.
/// Input u = (I [A], T_amb [K]); measurement z = (V [V], T_surf [K]).
Model make_model(const Config& cfg, double dt);

} // namespace ssmid::battx
