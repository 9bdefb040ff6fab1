#ifndef NORMBOUND_MODEL_HPP
#define NORMBOUND_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace normbound {

enum class Activation { relu, tanh, sigmoid };

// Block-structured MLP family:
//   k = 0:      x -> head
//   k >= 1:     x -> stem(in->w) -> act -> k blocks (w->w) -> head(w->out)
// With skip connections each block computes h + act(W h + b) (identity add,
// no projection, so the parameter count does not change).
struct ModelConfig {
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    std::size_t block_count = 0; // k
    std::size_t hidden_width = 0;
    Activation activation = Activation::relu;
    bool skip_connections = false;
    double dropout_rate = 0.0;
    enum class Head { linear, none } head = Head::linear;
};

struct AffineSpec {
    std::size_t w_offset = 0; // row-major (out x in) slice of theta
    std::size_t b_offset = 0;
    std::size_t in = 0;
    std::size_t out = 0;
};

struct ParamModel {
    ModelConfig config;
    std::size_t theta_count = 0;
    std::optional<AffineSpec> stem;
    std::vector<AffineSpec> blocks;
    std::optional<AffineSpec> head;

    std::size_t input_dim() const { return config.input_dim; }
    std::size_t output_dim() const;
};

ParamModel build(const ModelConfig& config);

struct InitScheme {
    enum class Kind { he, xavier } kind = Kind::he;
    std::uint64_t seed = 0;
};

// He: weights ~ Normal(0, 2/fan_in); Xavier: Uniform(+-sqrt(6/(fan_in+fan_out))).
// Biases are zero. Same seed => bit-identical theta.
std::vector<double> init(const ParamModel& model, const InitScheme& scheme);

} // namespace normbound

#endif
