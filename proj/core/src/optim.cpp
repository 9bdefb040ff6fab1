#include "normbound/optim.hpp"

#include "normbound/autodiff.hpp"
#include "normbound/errors.hpp"

#include <cmath>
#include <unordered_set>

namespace normbound {

SgdState make_sgd(std::vector<double> theta, double lr, double momentum) {
    if (!(lr > 0)) throw config_error("sgd: learning rate must be positive");
    if (!(momentum >= 0 && momentum < 1)) throw config_error("sgd: momentum must lie in [0, 1)");
    SgdState s;
    s.velocity.assign(theta.size(), 0.0);
    s.theta = std::move(theta);
    s.lr = lr;
    s.momentum = momentum;
    return s;
}

void sgd_step(SgdState& state, std::span<const double> grad) {
    if (grad.size() != state.theta.size()) throw domain_error("sgd_step: gradient length mismatch");
    for (double v : grad) {
        if (!std::isfinite(v)) throw numeric_error("sgd_step: non-finite gradient component");
    }
    for (std::size_t i = 0; i < state.theta.size(); ++i) {
        state.velocity[i] = state.momentum * state.velocity[i] + grad[i];
        state.theta[i] -= state.lr * state.velocity[i];
    }
    ++state.step;
}

OptimalStep optimal_step(const OmegaSpec& omega, std::span<const double> grad) {
    double g2 = 0;
    for (double v : grad) g2 += v * v;
    OptimalStep out;
    if (g2 == 0.0) {
        out.alpha = 0.0;
        out.predicted_decrease = -omega.relaxation;
        return out;
    }
    const double r = omega.power.order;
    const double rc = conjugate_order(r);
    const double omega_g = eval(omega.power, grad);
    out.alpha = std::pow(g2 / (r * omega_g), rc - 1.0);
    out.predicted_decrease = std::pow(omega_norm(omega.power, grad), rc) - omega.relaxation;
    return out;
}

double estimate_M(const LossKind& kind, const ParamModel& model,
                  std::span<const double> theta_before, std::span<const double> theta_after,
                  std::span<const DatasetSample> full_set,
                  std::span<const std::size_t> batch_indices) {
    std::unordered_set<std::size_t> in_batch(batch_indices.begin(), batch_indices.end());
    double before = 0, after = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < full_set.size(); ++i) {
        if (in_batch.contains(i)) continue;
        const auto& z = full_set[i];
        before += loss_eval(kind, forward(model, theta_before, z.x).output, z.y);
        after += loss_eval(kind, forward(model, theta_after, z.x).output, z.y);
        ++count;
    }
    if (count == 0) return 0.0; // empty complement by convention
    return (after - before) / static_cast<double>(count);
}

std::uint64_t steps_to_epsilon(double epsilon, const OmegaSpec& omega, std::size_t n,
                               std::size_t m, double initial_gap) {
    if (!(epsilon > 0)) throw domain_error("steps_to_epsilon: epsilon must be positive");
    if (m < 1 || m > n) throw domain_error("steps_to_epsilon: need 1 <= m <= n");
    if (!(initial_gap >= 0)) throw domain_error("steps_to_epsilon: initial gap must be >= 0");
    const double rc = conjugate_order(omega.power.order);
    const double t = static_cast<double>(n) * initial_gap /
                     (static_cast<double>(m) * std::pow(epsilon, rc));
    return static_cast<std::uint64_t>(std::ceil(t));
}

} // namespace normbound
