#pragma once

#include <functional>
#include <optional>

#include "ssmid/acquisition.hpp"
#include "ssmid/gp.hpp"
#include "ssmid/nelder_mead.hpp"

namespace ssmid {

/// Likelihood evaluation as the scheduler sees it: value at (theta, seed).
using LikelihoodFn = std::function<double(const Vec& theta, uint64_t seed)>;

/// Settings for the alternating global/local search.
struct SchedulerConfig {
    int init_samples = 0;   // D; 0 selects max(2(n+1), 20)
    int top_m = 3;          // switch threshold rank m (1 <= m <= n)
    int nm_patience = 0;    // p; 0 selects 2(n+1)
    int bo_stagnation = 10; // s
    double d_final = 1e-3;  // final-refinement tolerance (normalized coords)
    long eval_budget = 500;
    uint64_t seed = 0;
    bool rebaseline_d0 = false; // re-measure d0 from each round's initial simplex

    SchedulerConfig resolved(Eigen::Index n_theta) const;
    void validate(Eigen::Index n_theta) const;
};

/// Surrogate settings bundled for the scheduler.
struct GpConfig {
    KernelFamily kernel = KernelFamily::Matern52;
    GpTrainConfig train;
    AcqConfig acq;
    int refit_dense_until = 100; // refit hyperparameters every iteration up to this pool size
    int refit_interval = 5;      // afterwards, refit every k-th opportunity
    // conditioning-set cap for very long runs: above this many finite
    // observations the surrogate conditions on the best half plus the most
    // recent half (0 = always use the full pool)
    int condition_cap = 1000;
};

enum class Phase { Init, Nm, Bo, Final };
std::string to_string(Phase p);

struct TraceEntry {
    long index = 0; // 1-based evaluation index
    Vec theta;      // physical coordinates
    double value = kNegInf;
    Phase phase = Phase::Init;
    double wall_s = 0.0; // in-memory diagnostic; not serialized
};

struct SwitchEvent {
    long eval_index = 0;
    std::string from;
    std::string to;
    std::string reason;
    double triggering_value = kNegInf;
    int rank = 0;
    size_t pool_size = 0;
    // local-search round bookkeeping (nm -> bo events only)
    int round = 0;
    double d0 = 0.0;
    double d_lim = 0.0;
};

struct RunTrace {
    std::vector<TraceEntry> entries;
    std::vector<SwitchEvent> switches;

    std::vector<double> best_so_far() const;
};

/// Budget-enforcing evaluation gateway. Every likelihood call of a run goes
/// through here: it derives the per-evaluation seed from (run seed, index),
/// records the trace entry, and refuses calls past the budget.
class EvalBroker {
public:
    EvalBroker(LikelihoodFn fn, long budget, uint64_t run_seed, RunTrace& trace)
        : fn_(std::move(fn)), budget_(budget), run_seed_(run_seed), trace_(trace) {}

    /// nullopt once the budget is exhausted.
    std::optional<double> evaluate(const Vec& theta, Phase phase);

    long used() const { return used_; }
    long remaining() const { return budget_ - used_; }
    bool exhausted() const { return used_ >= budget_; }

private:
    LikelihoodFn fn_;
    long budget_;
    uint64_t run_seed_;
    RunTrace& trace_;
    long used_ = 0;
};

// --- scheduler building blocks ----------------------------------------------

/// Latin-hypercube initialization: D samples in the box, all evaluated.
/// Throws InfeasibleSpaceError when every sample comes back -inf.
ObservationPool initialize_pool(const ParameterSpace& space, int d_samples,
                                EvalBroker& broker, Rng& rng);

/// Simplex for the next local-search round: the pool's top m points plus
/// n-m+1 distinct points drawn uniformly from the rest. Zero-volume picks
/// are redrawn; as a last resort duplicates are nudged apart. Vertices are
/// in normalized coordinates.
Simplex build_nm_simplex(const ObservationPool& pool, const ParameterSpace& space,
                         int top_m, Rng& rng, const NmCoefficients& coeff = {});

/// Local-search distance limit for a (1-based) round: d0 / 2^round.
double d_lim_schedule(int round, double d0);

enum class BoOutcome { SwitchToNm, Stagnated };

/// Persistent surrogate-training state across global-search iterations.
struct GpTrainState {
    std::optional<KernelSpec> hypers;
    long fit_opportunities = 0;
};

struct NmPhaseInfo {
    double d_lim = 0.0;
    double d0 = 0.0;
    NmTermination reason = NmTermination::Converged;
    long evaluations = 0;
};

/// One local-search round: build the simplex, run until d < d_lim(round) or
/// `patience` iterations without improvement, pool every evaluation.
NmPhaseInfo nm_phase(ObservationPool& pool, const ParameterSpace& space,
                     const NmCoefficients& coeff, int top_m, int round, int patience,
                     double& d0, bool rebaseline_d0, EvalBroker& broker, Rng& rng);

/// Expected-improvement iterations until a new observation ranks in the
/// pool's top m (SwitchToNm) or `stagnation_limit` iterations pass without
/// one (Stagnated; also returned when the budget runs out).
BoOutcome bo_phase(ObservationPool& pool, const ParameterSpace& space,
                   const GpConfig& gp_cfg, int top_m, int stagnation_limit,
                   EvalBroker& broker, Rng& rng, GpTrainState& train_state);

/// Final local refinement from the best n+1 pool points down to d < d_final.
void final_refinement(ObservationPool& pool, const ParameterSpace& space,
                      const NmCoefficients& coeff, double d_final, EvalBroker& broker,
                      Rng& rng);

struct RunResult {
    Vec theta_star;
    double l_star = kNegInf;
    RunTrace trace;
    ObservationPool pool;
};

/// The full alternating search: initialization, repeated local/global
/// rounds until the global phase stagnates, then final refinement. Returns
/// the pool argmax. Deterministic given cfg.seed.
RunResult run_accelerated(const ParameterSpace& space, const LikelihoodFn& likelihood,
                          const SchedulerConfig& cfg, const GpConfig& gp_cfg,
                          const NmCoefficients& nm_coeff = {});

/// Ablation: expected-improvement loop only (same initialization).
RunResult run_plain_bo(const ParameterSpace& space, const LikelihoodFn& likelihood,
                       const SchedulerConfig& cfg, const GpConfig& gp_cfg);

/// Ablation: restarted local search only (same initialization).
RunResult run_plain_nm(const ParameterSpace& space, const LikelihoodFn& likelihood,
                       const SchedulerConfig& cfg, const NmCoefficients& nm_coeff = {});

enum class OptimizerKind { Accelerated, PlainBo, PlainNm };
OptimizerKind optimizer_kind_from_string(const std::string& s);
std::string to_string(OptimizerKind k);

RunResult run_optimizer(OptimizerKind kind, const ParameterSpace& space,
                        const LikelihoodFn& likelihood, const SchedulerConfig& cfg,
                        const GpConfig& gp_cfg, const NmCoefficients& nm_coeff = {});

} // namespace ssmid
