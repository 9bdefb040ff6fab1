#ifndef NORMBOUND_GICSTAT_HPP
#define NORMBOUND_GICSTAT_HPP

#include "normbound/autodiff.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace normbound {

// Gradient-independence diagnostics: do the Jacobian columns look like
// independent uniform draws from a parameter-space ball?

struct GicReport {
    std::size_t n_columns = 0;
    std::size_t dim = 0;
    double epsilon = 0;
    double fraction_norm_ok = 0;  // ||x_i|| >= 1 - 2 ln n / m after scaling to the unit ball
    double fraction_inner_ok = 0; // |<x_i, x_j>| <= sqrt(6 ln n) / sqrt(m - 1)
    double max_abs_inner = 0;
    double min_norm = 0;
    bool passes = false; // both fractions >= 1 - c/n
};

// n points uniform in the epsilon-ball of R^m: normalized Gaussian direction
// and radius epsilon * U^(1/m). Points are returned concatenated (row i at
// [i*m, (i+1)*m)).
std::vector<double> sample_ball(std::size_t m, std::size_t n, double epsilon,
                                std::uint64_t seed);

// Concentration check on n points of dimension m already scaled to the unit
// ball. pass_margin is the c of the 1 - c/n pass threshold.
GicReport concentration_check(std::span<const double> points, std::size_t n, std::size_t m,
                              double pass_margin = 5.0);

// Applies the concentration check to the columns of a parameter Jacobian;
// epsilon <= 0 selects the max column norm.
GicReport gic_check(const Jacobian& j, double epsilon = 0.0, double pass_margin = 5.0);

// Z(|theta|, m_f) = 2 m_f sqrt(6 ln m_f) / sqrt(|theta|-1) * (1 - 2 ln m_f/|theta|)^2.
double z_factor(std::size_t theta_count, std::size_t mf);

struct PredictedStructuralBounds {
    double u_max = 0; // -ln(1 - 2 ln m_f/|theta|)^2 - ln eps^2
    double d_max = 0; // ln(Z + 1)
};

PredictedStructuralBounds predicted_structural_bounds(std::size_t theta_count, std::size_t mf,
                                                      double epsilon);

struct SlidingPearson {
    std::vector<double> values;      // length = len - w + 1, each in [-1, 1]
    std::vector<bool> zero_variance; // matching flags; flagged windows report 0
};

SlidingPearson sliding_pearson(std::span<const double> x, std::span<const double> y,
                               std::size_t window);

// Single-window Pearson correlation; zero-variance windows report 0 and set the flag.
double pearson(std::span<const double> x, std::span<const double> y, bool* zero_variance = nullptr);

} // namespace normbound

#endif
