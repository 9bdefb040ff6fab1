#ifndef NORMBOUND_NORMPOWER_HPP
#define NORMBOUND_NORMPOWER_HPP

#include <cstddef>
#include <span>
#include <string>

namespace normbound {

enum class Norm { l1, l2, lp, linf };

std::string norm_name(Norm n, double p);

// Scaled norm power a * ||.||^r with r > 1, a > 0. Convex, non-negative,
// positively homogeneous of degree r. The lp variant carries its exponent p.
struct NormPower {
    Norm norm = Norm::l2;
    double p = 2.0;   // only meaningful for Norm::lp, where p > 1 is required
    double order = 2.0;
    double scale = 1.0;
};

NormPower make_power(Norm norm, double order, double scale);
NormPower make_lp_power(double p, double order, double scale);

// Conjugate exponent r* with 1/r + 1/r* = 1.
double conjugate_order(double r);

// Underlying norm ||mu|| of the power's norm family.
double norm_value(const NormPower& f, std::span<const double> mu);

// a * ||mu||^r. Throws domain_error on non-finite components.
double eval(const NormPower& f, std::span<const double> mu);

// Normalized form (r * eval)^(1/r); always a norm.
double normalized(const NormPower& f, std::span<const double> mu);

// Legendre-Fenchel conjugate: dual norm family, conjugate order, and scale
// (1/r*) * r^(1-r*) * a^(1-r*). An linf primal is rejected; the lp table
// only covers p in {1} u (1, inf) as primal families.
NormPower conjugate(const NormPower& f);

// Fenchel-Young loss Omega(mu) + Omega*(nu) - <mu, nu>. Non-negative,
// zero exactly when nu is the gradient of Omega at mu.
double fy_loss(const NormPower& omega, std::span<const double> mu,
               std::span<const double> nu);

struct EquivalenceConstants {
    double lo = 0; // lo * ||mu||_2 <= normalized(mu)
    double hi = 0; // normalized(mu) <= hi * ||mu||_2
};

// Basis-vector equivalence constants between the normalized form and the
// Euclidean norm in dimension m:
//   lo = m^(-1/2) (sum_i conj_normalized(e_i)^2)^(-1/2),
//   hi = (sum_i normalized(e_i)^2)^(1/2).
EquivalenceConstants equivalence_constants(const NormPower& f, std::size_t m);

struct PowerLinearMin {
    double argmin = 0;
    double min_value = 0;
};

// Minimizes K(x) = a x^r - b x over x > 0 for a, b > 0, r > 1:
//   x* = (b / (r a))^(s-1),  K(x*) = -s^(-1) b^s (r a)^(1-s),  s = r/(r-1).
PowerLinearMin minimize_power_linear(double a, double b, double r);

// ||x||_Omega = r*^(-1/r*) ||x||_2^2 / normalized(Omega, x); 0 at the origin.
double omega_norm(const NormPower& omega, std::span<const double> x);

// Bound descriptor: a norm power plus a non-negative relaxation constant.
struct RelaxedBound {
    NormPower power;
    double relaxation = 0.0;
};

RelaxedBound make_relaxed(NormPower power, double relaxation);

} // namespace normbound

#endif
