#ifndef NORMBOUND_CONFIG_HPP
#define NORMBOUND_CONFIG_HPP

#include "normbound/loss.hpp"
#include "normbound/model.hpp"
#include "normbound/optim.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace normbound {

// Flat UTF-8 key-value text: one `section.key = value` per line, `#` comments.
struct KeyValues {
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
};

KeyValues parse_key_values(const std::string& text);
KeyValues load_key_values(const std::filesystem::path& path);

struct DataConfig {
    enum class Source { synthetic, idx } source = Source::synthetic;
    std::string images_path;
    std::string labels_path;
    std::size_t classes = 10;
    std::size_t per_class = 100;
    std::size_t dim = 32;
    double separation = 4.0;
    std::size_t subset_n = 0; // 0 keeps the full set
    std::uint64_t seed = 0;
};

struct OptimizerConfig {
    double lr = 0.01;
    double momentum = 0.9;
    std::size_t batch_size = 64;
    std::uint64_t steps = 0;
    std::uint64_t epochs = 0; // used when steps == 0
    bool adaptive_step = false;
    std::uint64_t m_stride = 10; // 0 disables the correlation-factor probe
    OmegaSpec omega{};
};

struct DiagnosticsConfig {
    StructuralWeights weights{};
    double eig_floor_scale = 1e-12;
    std::uint64_t stride = 10;
    std::size_t batch_size = 16;
    std::size_t pearson_window = 50;
    std::uint64_t checkpoint_stride = 0; // 0 writes only the final checkpoint
};

struct SweepConfig {
    std::vector<std::size_t> k_list = {0, 2, 4, 8, 12};
    std::size_t seeds = 20;
};

struct GicConfig {
    std::size_t mc_trials = 0; // > 0 adds the ball-sampling containment study
    std::size_t mc_theta = 10000;
    std::size_t mc_mf = 50;
    double mc_epsilon = 1.0;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string output_dir = "runs/out";
    ModelConfig model{};
    InitScheme init{};
    LossKind loss{};
    std::optional<EmpiricalTriple> loss_profile; // fitted (a, r, c) override
    OptimizerConfig optimizer{};
    DiagnosticsConfig diagnostics{};
    DataConfig data{};
    SweepConfig sweep{};
    GicConfig gic{};
};

// Validates every key (unknown keys are rejected with the offending path)
// and applies defaults. Reported errors carry the config key name.
ExperimentConfig parse_experiment_config(const KeyValues& kv);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

} // namespace normbound

#endif
