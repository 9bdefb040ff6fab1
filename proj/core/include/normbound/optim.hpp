#ifndef NORMBOUND_OPTIM_HPP
#define NORMBOUND_OPTIM_HPP

#include "normbound/diagnostics.hpp"
#include "normbound/loss.hpp"
#include "normbound/model.hpp"
#include "normbound/normpower.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace normbound {

struct SgdState {
    std::vector<double> theta;
    std::vector<double> velocity;
    double lr = 0.01;
    double momentum = 0.0;
    std::uint64_t step = 0;
};

SgdState make_sgd(std::vector<double> theta, double lr, double momentum);

// v <- momentum v + grad; theta <- theta - lr v.
void sgd_step(SgdState& state, std::span<const double> grad);

// Smoothness descriptor of the loss as a function of theta.
struct OmegaSpec {
    NormPower power = make_power(Norm::l2, 2.0, 0.5);
    double relaxation = 0.0; // c_Omega
};

struct OptimalStep {
    double alpha = 0;
    double predicted_decrease = 0; // ||g||_Omega^r* - c_Omega, may be negative
};

// alpha = (||g||_2^2 / (r Omega(g)))^(r*-1); zero gradient yields (0, -c).
OptimalStep optimal_step(const OmegaSpec& omega, std::span<const double> grad);

// One-step loss change on the complement of the update batch:
// L(theta_after, s \ s_k) - L(theta_before, s \ s_k). The harness tracks the
// running maximum as the empirical gradient correlation factor. Empty
// complements (batch == full set) return 0.
double estimate_M(const LossKind& kind, const ParamModel& model,
                  std::span<const double> theta_before, std::span<const double> theta_after,
                  std::span<const DatasetSample> full_set,
                  std::span<const std::size_t> batch_indices);

// Step budget ceil(n * initial_gap / (m * eps^r*)) guaranteeing that the
// running-min Omega-norm of the batch gradient meets eps^r* (up to the
// (n-m)/m * M + c_Omega additive slack).
std::uint64_t steps_to_epsilon(double epsilon, const OmegaSpec& omega, std::size_t n,
                               std::size_t m, double initial_gap);

} // namespace normbound

#endif
