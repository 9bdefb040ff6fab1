#ifndef NORMBOUND_HARNESS_HPP
#define NORMBOUND_HARNESS_HPP

#include "normbound/config.hpp"
#include "normbound/data.hpp"
#include "normbound/gicstat.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace normbound {

// Library backing of the CLI subcommands. Every output byte is a function of
// (config, seed); see the trace column list in the README.

struct TrainSummary {
    std::filesystem::path run_dir;
    std::filesystem::path trace_path;
    std::uint64_t steps = 0;
    double initial_train_loss = 0;
    double final_train_loss = 0;
    double max_measured_m = 0;
    std::uint64_t sandwich_violations = 0; // non-degenerate rows with loss outside [lower, upper]
    std::uint64_t sandwich_rows = 0;
    std::uint64_t empirical_violations = 0; // same count for fitted (reported-only) profiles
    std::uint64_t empirical_rows = 0;
    double median_pearson_upper = 0; // over valid diagnostic events
    double median_pearson_lower = 0;
    double min_local_grad_norm = 0;  // running min of E||grad ell||^2 over events
    double gamma_equivalence = 0;    // explicit norm-equivalence constant for omega
};

TrainSummary cmd_train(const ExperimentConfig& cfg, unsigned threads = 1);

std::filesystem::path cmd_analyze(const ExperimentConfig& cfg,
                                  const std::filesystem::path& checkpoint,
                                  unsigned threads = 1);

std::filesystem::path cmd_depth_sweep(const ExperimentConfig& cfg, unsigned threads = 1);

struct GicRunSummary {
    std::filesystem::path report_path;
    GicReport at_init;
    std::optional<GicReport> at_checkpoint;
    double mc_containment_fraction = -1; // -1 when the Monte-Carlo study was not requested
};

GicRunSummary cmd_gic(const ExperimentConfig& cfg,
                      const std::optional<std::filesystem::path>& checkpoint,
                      unsigned threads = 1);

struct ReportSummary {
    std::filesystem::path bounds_svg;
    std::filesystem::path pearson_svg;
    std::filesystem::path indicators_svg;
    std::filesystem::path summary_md;
};

ReportSummary cmd_report(const std::filesystem::path& run_dir);

// Loads the dataset named by the config (synthetic or idx, with optional
// subsetting).
Dataset load_dataset(const ExperimentConfig& cfg);

// Fixed trace.csv column list.
const std::vector<std::string>& trace_columns();

// Deterministic seed derivation for named sub-streams of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

// Median of the finite entries of v; nan when none.
double median_finite(std::vector<double> v);

} // namespace normbound

#endif
