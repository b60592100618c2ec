#pragma once

#include "ssmid/harness/config.hpp"
#include "ssmid/hybrid.hpp"

namespace ssmid::harness {

/// A dataset bound to the model instance (at its sampling interval) and the
/// initial state its filter prior is centered on.
struct BoundDataset {
    Dataset data;
    Vec x0;
    Model model;
};

/// Run context: configuration plus the resolved parameter space and
/// model-construction helpers.
class Experiment {
public:
    explicit Experiment(RunConfig cfg);

    const RunConfig& config() const { return cfg_; }
    RunConfig& config() { return cfg_; }
    const ParameterSpace& space() const { return space_; }

    Model model_at(double dt) const;
    int state_dim() const;
    Vec x0_for(const Dataset& ds) const;
    NoiseSpec noise() const;
    const std::vector<std::string>& input_names() const { return input_names_; }
    const std::vector<std::string>& meas_names() const { return meas_names_; }

    /// Synthesize one dataset. The noise seed is the spec's own seed when
    /// given, otherwise derived from (run seed, index).
    Dataset synthesize(const DatasetSpec& spec, size_t index) const;

    /// Load or synthesize the given specs and bind model + initial state.
    std::vector<BoundDataset> materialize(const std::vector<DatasetSpec>& specs) const;

    /// Total log-likelihood over bound datasets as a (theta, seed) callable.
    LikelihoodFn make_likelihood(std::shared_ptr<const std::vector<BoundDataset>> data) const;

private:
    RunConfig cfg_;
    ParameterSpace space_;
    std::vector<std::string> input_names_;
    std::vector<std::string> meas_names_;
};

/// `simulate` driver: write every configured dataset (identification and
/// validation) as CSV plus a truth sidecar JSON. Returns a manifest.
json write_datasets(const Experiment& ex, const std::filesystem::path& outdir);

/// `identify` driver: run the configured optimizer on the configured
/// datasets; write report.json and trace.csv. Returns the report.
json run_identification(const Experiment& ex, const std::filesystem::path& outdir);

/// `validate` driver: deterministic simulation at theta against validation
/// datasets; writes validation.json, validation.csv and residual CSVs.
json validate_model(const Experiment& ex, const Vec& theta,
                    const std::filesystem::path& outdir);

/// `compare-filters` driver: likelihood mean/std/quantiles per
/// (method, N_p) cell at the truth parameters. Writes filter_comparison.csv.
json filter_comparison(const Experiment& ex, const std::filesystem::path& outdir);

/// `compare-optimizers` driver: per-optimizer best-so-far mean/std aligned
/// by evaluation index. Writes optimizer_comparison.csv.
json optimizer_comparison(const Experiment& ex, const std::filesystem::path& outdir);

/// Resolve the parameter vector for `validate` (inline theta or a report's
/// theta_hat).
Vec resolve_validation_theta(const Experiment& ex);

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace,
                     const ParameterSpace& space);

} // namespace ssmid::harness
