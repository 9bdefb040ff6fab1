#ifndef NORMBOUND_LOSS_HPP
#define NORMBOUND_LOSS_HPP

#include "normbound/normpower.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace normbound {

struct LossKind {
    enum class Tag { mse, softmax_ce, l1, smooth_l1, pnorm_pow } tag = Tag::mse;
    double beta = 1.0; // smooth_l1 transition point
    int k = 2;         // pnorm_pow exponent, integer in [1, 6]
};

LossKind parse_loss_kind(const std::string& name, double beta, int k);
std::string loss_name(const LossKind& kind);

double loss_eval(const LossKind& kind, std::span<const double> f,
                 std::span<const double> y);

// Gradient with respect to the model output f. Subgradient convention
// sign(0) = 0 at kinks of l1 / pnorm_pow(1).
std::vector<double> loss_grad_output(const LossKind& kind, std::span<const double> f,
                                     std::span<const double> y);

// Convexity/smoothness descriptor of a loss in output space:
// convex_part bounds ell - ell* from below, smooth_part from above (through
// their conjugates in the gradient-based bounds).
struct SmoothnessProfile {
    RelaxedBound convex_part;  // (phi, c_phi)
    RelaxedBound smooth_part;  // (Phi, c_Phi)
    double per_sample_optimum = 0.0; // ell*(z) for every supported kind
    bool data_dependent = false;     // smooth scale depends on the batch
    bool empirical = false;          // fitted bounds, reported instead of asserted
};

// Per-batch inputs of data-dependent profiles: q_min is the smallest softmax
// output component seen across the diagnostic batch.
struct BatchContext {
    double softmax_q_min = 0.0;
};

// Optional user-supplied (a, r, c) for losses without exact constants.
struct EmpiricalTriple {
    double a = 1.0;
    double r = 2.0;
    double c = 0.0;
};

SmoothnessProfile profile(const LossKind& kind, const BatchContext& ctx,
                          const std::optional<EmpiricalTriple>& fitted = std::nullopt);

// Numerically stable softmax of f.
std::vector<double> softmax(std::span<const double> f);

} // namespace normbound

#endif
