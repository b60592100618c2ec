#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "ssmid/battx.hpp"
#include "ssmid/hybrid.hpp"
#include "ssmid/likelihood.hpp"

namespace ssmid::harness {

using json = nlohmann::json;

/// Synthetic current/ambient profile description.
struct ProfileSpec {
    std::string kind;        // "constant_crate" | "random_walk"
    double c_rate = 3.0;     // constant_crate level
    double c_rate_min = 0.0; // random_walk bounds, within [0, 5]
    double c_rate_max = 5.0;
    double ambient_k = 298.0;
    double duration_s = 600.0;
    double dt = 1.0;
    uint64_t seed = 0;

    void validate() const;
};

/// One identification or validation dataset: either a CSV path or a
/// synthesis recipe (profile + truth parameters + noise).
struct DatasetSpec {
    std::string path;  // empty when synthesized
    std::string label; // synthesis label
    std::optional<ProfileSpec> profile;
    bool noiseless = false;
    std::optional<uint64_t> seed; // noise seed override for synthesis
};

struct ModelConfig {
    std::string kind = "battx"; // "battx" | "logistic"
    // battx specifics
    int n_nodes = 5;
    std::optional<Vec> eta;
    std::optional<Vec> sigma;
    double t_ref = 298.0;
    std::optional<std::vector<std::pair<double, double>>> ocv_knots;
    double capacity_ah = 0.0; // required for c-rate synthesis
    double initial_soc = 1.0;
    // logistic toy specifics
    double logistic_x0 = 0.5;

    battx::Config battx_config() const;
};

struct LikelihoodBlock {
    LikelihoodMethod method = LikelihoodMethod::Uipf;
    LikelihoodConfig cfg;
    UtParams ut;
    bool parallel_datasets = true;
};

struct NoiseBlock {
    double q = 1e-8;    // isotropic process-noise variance
    Vec r_diag;         // measurement-noise diagonal; empty selects per-model default
};

struct FilterComparisonBlock {
    std::vector<int> particle_grid = {10, 100};
    int replications = 100;
    std::vector<LikelihoodMethod> methods = {LikelihoodMethod::Uipf,
                                             LikelihoodMethod::Apf};
};

struct OptimizerComparisonBlock {
    std::vector<OptimizerKind> optimizers = {OptimizerKind::Accelerated,
                                             OptimizerKind::PlainBo};
    int replications = 20;
};

struct ValidateBlock {
    std::string theta_from_report; // report path; empty when theta given inline
    std::optional<Vec> theta;      // in parameter-space order
};

/// Full run configuration. Parsed strictly: unknown keys anywhere are
/// rejected.
struct RunConfig {
    uint64_t seed = 0;
    std::string output_dir = "out";
    ModelConfig model;
    std::optional<ParameterSpace> space; // defaults to the model's space
    std::optional<Vec> truth;            // generating parameters, space order
    LikelihoodBlock likelihood;
    NoiseBlock noise;
    GpConfig gp;
    NmCoefficients nelder_mead;
    SchedulerConfig scheduler;
    OptimizerKind optimizer = OptimizerKind::Accelerated;
    std::vector<DatasetSpec> datasets;
    std::vector<DatasetSpec> validation_datasets;
    std::optional<ValidateBlock> validate;
    FilterComparisonBlock filter_comparison;
    OptimizerComparisonBlock optimizer_comparison;

    static RunConfig from_json(const json& j);
    json to_json() const;
};

RunConfig load_config(const std::filesystem::path& path);

} // namespace ssmid::harness
