#ifndef NORMBOUND_AUTODIFF_HPP
#define NORMBOUND_AUTODIFF_HPP

#include "normbound/model.hpp"
#include "normbound/rng.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace normbound {

// Reverse-mode engine over dense vectors, just enough for the MLP family:
// affine layers with parameters taken from a flat theta, elementwise
// activations, softmax, skip adds and concatenation.

enum class OpKind : unsigned char {
    input,
    affine,
    relu,     // subgradient at 0 is 0
    tanh,
    sigmoid,
    softmax,
    add,
    concat,
    dropout,  // inverted dropout: kept units scaled by 1/(1-rate)
};

struct TapeNode {
    OpKind kind = OpKind::input;
    int a = -1; // first input node
    int b = -1; // second input node (add/concat)
    AffineSpec affine{};
    std::vector<double> value;
    std::vector<double> aux; // dropout keep-mask scaling per unit
    std::string label;       // layer name for error reporting
};

// Execution record of one forward pass. Replaying VJPs against a tape does
// not mutate it; a single tape must not be shared across threads.
struct Tape {
    std::vector<TapeNode> nodes;
    std::vector<double> theta; // parameters the pass was evaluated at
    std::size_t theta_count = 0;
    int output_node = -1;

    std::span<const double> output() const { return nodes[output_node].value; }
    std::size_t output_dim() const { return nodes[output_node].value.size(); }
};

// Records primitives one node at a time; forward() drives it over a
// ParamModel, and custom graphs can compose the same ops directly.
class TapeBuilder {
public:
    explicit TapeBuilder(std::span<const double> theta);

    int input(std::span<const double> x);
    int affine(int src, const AffineSpec& spec, std::string label);
    int activation(int src, Activation act, std::string label);
    int softmax(int src, std::string label);
    int add(int lhs, int rhs, std::string label);
    int concat(int lhs, int rhs, std::string label);
    int dropout(int src, double rate, Rng& rng, std::string label);

    std::span<const double> value(int node) const { return tape_.nodes[node].value; }
    Tape finish(int output_node);

private:
    int push(TapeNode node);
    Tape tape_;
};

struct ForwardResult {
    std::vector<double> output;
    Tape tape;
};

ForwardResult forward(const ParamModel& model, std::span<const double> theta,
                      std::span<const double> x);

// grad_theta of <cotangent, f(theta)> at the tape's theta.
std::vector<double> vjp_params(const Tape& tape, std::span<const double> cotangent);

// Dense |theta| x m_f Jacobian, stored column-major: column i (= grad_theta f_i)
// occupies data[i*theta_count .. (i+1)*theta_count).
struct Jacobian {
    std::size_t theta_count = 0;
    std::size_t mf = 0;
    std::vector<double> data;

    std::span<const double> column(std::size_t i) const {
        return {data.data() + i * theta_count, theta_count};
    }
};

inline constexpr std::size_t kDefaultJacobianBudgetBytes = std::size_t{1} << 30;

Jacobian jacobian_params(const ParamModel& model, std::span<const double> theta,
                         std::span<const double> x,
                         std::size_t budget_bytes = kDefaultJacobianBudgetBytes);

// Masked forward evaluator. Masks are resampled on every call from the
// evaluator's own stream, so the training loop owns the dropout randomness.
class DropoutEvaluator {
public:
    DropoutEvaluator(const ParamModel& model, double rate, std::uint64_t seed);

    ForwardResult forward(std::span<const double> theta, std::span<const double> x);

private:
    const ParamModel* model_;
    double rate_;
    Rng rng_;
};

DropoutEvaluator apply_dropout(const ParamModel& model, double rate, std::uint64_t seed);

} // namespace normbound

#endif
