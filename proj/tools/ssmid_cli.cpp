#include <CLI11.hpp>
#include <iostream>

#include "ssmid/harness/experiment.hpp"

namespace {

using ssmid::harness::Experiment;
using ssmid::harness::RunConfig;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Run configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "Override the configured seed");
    cmd->add_option("--out", args.out_dir, "Output directory (overrides config)");
}

Experiment make_experiment(const CommonArgs& args) {
    RunConfig cfg = ssmid::harness::load_config(args.config_path);
    if (args.seed >= 0) cfg.seed = static_cast<uint64_t>(args.seed);
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    return Experiment(std::move(cfg));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear state-space model identification toolkit"};
    app.require_subcommand(1);

    CommonArgs sim_args, id_args, val_args, cf_args, co_args;
    auto* sim = app.add_subcommand("simulate", "Synthesize the configured datasets");
    add_common(sim, sim_args);
    auto* id = app.add_subcommand("identify", "Run parameter identification");
    add_common(id, id_args);
    auto* val = app.add_subcommand("validate", "Score a parameter vector on validation data");
    add_common(val, val_args);
    auto* cf = app.add_subcommand("compare-filters",
                                  "Likelihood-evaluator spread across methods and particle counts");
    add_common(cf, cf_args);
    auto* co = app.add_subcommand("compare-optimizers",
                                  "Best-so-far convergence across optimizer variants");
    add_common(co, co_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            Experiment ex = make_experiment(sim_args);
            const auto manifest =
                ssmid::harness::write_datasets(ex, ex.config().output_dir);
            std::cout << "wrote " << manifest["datasets"].size() << " dataset entries to "
                      << ex.config().output_dir << "\n";
        } else if (id->parsed()) {
            Experiment ex = make_experiment(id_args);
            const auto report =
                ssmid::harness::run_identification(ex, ex.config().output_dir);
            std::cout << "L_hat = " << report["L_hat"] << " after "
                      << report["evaluations"] << " evaluations; report in "
                      << ex.config().output_dir << "\n";
        } else if (val->parsed()) {
            Experiment ex = make_experiment(val_args);
            const auto theta = ssmid::harness::resolve_validation_theta(ex);
            const auto result =
                ssmid::harness::validate_model(ex, theta, ex.config().output_dir);
            std::cout << result["results"].dump() << "\n";
        } else if (cf->parsed()) {
            Experiment ex = make_experiment(cf_args);
            ssmid::harness::filter_comparison(ex, ex.config().output_dir);
            std::cout << "filter comparison written to " << ex.config().output_dir << "\n";
        } else if (co->parsed()) {
            Experiment ex = make_experiment(co_args);
            ssmid::harness::optimizer_comparison(ex, ex.config().output_dir);
            std::cout << "optimizer comparison written to " << ex.config().output_dir
                      << "\n";
        }
    } catch (const ssmid::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ssmid::InfeasibleSpaceError& e) {
        std::cerr << "infeasible search space: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
