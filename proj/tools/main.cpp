#include "normbound/config.hpp"
#include "normbound/csv.hpp"
#include "normbound/errors.hpp"
#include "normbound/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct GlobalArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    unsigned threads = 1;
};

normbound::ExperimentConfig load_config(const GlobalArgs& g) {
    if (g.config_path.empty()) {
        throw normbound::config_error("--config is required for this subcommand");
    }
    normbound::ExperimentConfig cfg = normbound::load_experiment_config(g.config_path);
    if (g.seed) cfg.seed = *g.seed;
    if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"norm-power smoothness bounds and training diagnostics"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may appear before or after the subcommand

    GlobalArgs g;
    app.add_option("--config", g.config_path, "experiment config file");
    app.add_option("--seed", g.seed, "override the run seed");
    app.add_option("--out", g.out_dir, "override output_dir");
    app.add_option("--threads", g.threads, "worker threads for per-sample diagnostics");

    std::string analyze_checkpoint;
    std::string gic_checkpoint;
    std::string report_dir;

    auto* train = app.add_subcommand("train", "train a model and log the bound trace");
    auto* analyze = app.add_subcommand("analyze", "per-sample bound report for a checkpoint");
    analyze->add_option("--checkpoint", analyze_checkpoint, "flat-theta checkpoint")->required();
    auto* sweep =
        app.add_subcommand("depth-sweep", "spectral indicators vs depth at initialization");
    auto* gic = app.add_subcommand("gic", "gradient-independence report");
    gic->add_option("--checkpoint", gic_checkpoint, "optional checkpoint to re-check");
    auto* report = app.add_subcommand("report", "render SVG charts and a summary from a run");
    report->add_option("--run", report_dir, "run directory containing trace.csv")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            const auto s = normbound::cmd_train(load_config(g), g.threads);
            std::cout << "run directory: " << s.run_dir.string() << "\n"
                      << "steps: " << s.steps << "\n"
                      << "final train loss: " << normbound::format_double(s.final_train_loss)
                      << "\n";
        } else if (analyze->parsed()) {
            const auto path =
                normbound::cmd_analyze(load_config(g), analyze_checkpoint, g.threads);
            std::cout << "analysis written to " << path.string() << "\n";
        } else if (sweep->parsed()) {
            const auto path = normbound::cmd_depth_sweep(load_config(g), g.threads);
            std::cout << "depth sweep written to " << path.string() << "\n";
        } else if (gic->parsed()) {
            std::optional<std::filesystem::path> ckpt;
            if (!gic_checkpoint.empty()) ckpt = gic_checkpoint;
            const auto s = normbound::cmd_gic(load_config(g), ckpt, g.threads);
            std::cout << "gic report written to " << s.report_path.string() << "\n"
                      << "init passes: " << (s.at_init.passes ? "true" : "false") << "\n";
            if (s.mc_containment_fraction >= 0) {
                std::cout << "mc containment fraction: "
                          << normbound::format_double(s.mc_containment_fraction) << "\n";
            }
        } else if (report->parsed()) {
            const auto s = normbound::cmd_report(report_dir);
            std::cout << "report written to " << s.summary_md.string() << "\n";
        }
    } catch (const normbound::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const normbound::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const normbound::error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
