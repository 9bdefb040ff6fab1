#include "normbound/normpower.hpp"

#include "normbound/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace normbound {

namespace {

void require_finite(std::span<const double> mu, const char* where) {
    for (double v : mu) {
        if (!std::isfinite(v)) {
            throw domain_error(std::string(where) + ": non-finite input component");
        }
    }
}

void validate(const NormPower& f) {
    if (!(f.order > 1.0)) throw domain_error("norm power order must be > 1");
    if (!(f.scale > 0.0)) throw domain_error("norm power scale must be > 0");
    if (f.norm == Norm::lp && !(f.p > 1.0)) {
        throw domain_error("lp norm exponent must be > 1 (use l1/linf enumerators)");
    }
}

} // namespace

std::string norm_name(Norm n, double p) {
    switch (n) {
        case Norm::l1: return "l1";
        case Norm::l2: return "l2";
        case Norm::linf: return "linf";
        case Norm::lp: return "l" + std::to_string(p);
    }
    return "?";
}

NormPower make_power(Norm norm, double order, double scale) {
    NormPower f{norm, norm == Norm::l1 ? 1.0 : 2.0, order, scale};
    validate(f);
    return f;
}

NormPower make_lp_power(double p, double order, double scale) {
    NormPower f{Norm::lp, p, order, scale};
    validate(f);
    return f;
}

double conjugate_order(double r) {
    if (!(r > 1.0)) throw domain_error("conjugate_order requires r > 1");
    return r / (r - 1.0);
}

double norm_value(const NormPower& f, std::span<const double> mu) {
    switch (f.norm) {
        case Norm::l1: {
            double s = 0;
            for (double v : mu) s += std::abs(v);
            return s;
        }
        case Norm::l2: {
            double s = 0;
            for (double v : mu) s += v * v;
            return std::sqrt(s);
        }
        case Norm::linf: {
            double s = 0;
            for (double v : mu) s = std::max(s, std::abs(v));
            return s;
        }
        case Norm::lp: {
            // scale out the max component to keep pow() well conditioned
            double m = 0;
            for (double v : mu) m = std::max(m, std::abs(v));
            if (m == 0) return 0;
            double s = 0;
            for (double v : mu) s += std::pow(std::abs(v) / m, f.p);
            return m * std::pow(s, 1.0 / f.p);
        }
    }
    return 0;
}

double eval(const NormPower& f, std::span<const double> mu) {
    validate(f);
    require_finite(mu, "norm power eval");
    const double n = norm_value(f, mu);
    return f.scale * std::pow(n, f.order);
}

double normalized(const NormPower& f, std::span<const double> mu) {
    const double v = eval(f, mu);
    return std::pow(f.order * v, 1.0 / f.order);
}

NormPower conjugate(const NormPower& f) {
    validate(f);
    const double rc = conjugate_order(f.order);
    const double scale = (1.0 / rc) * std::pow(f.order, 1.0 - rc) * std::pow(f.scale, 1.0 - rc);
    switch (f.norm) {
        case Norm::l1: return NormPower{Norm::linf, 2.0, rc, scale};
        case Norm::l2: return NormPower{Norm::l2, 2.0, rc, scale};
        case Norm::lp: return NormPower{Norm::lp, f.p / (f.p - 1.0), rc, scale};
        case Norm::linf:
            throw domain_error("conjugate of an linf norm power is not supported");
    }
    return {};
}

double fy_loss(const NormPower& omega, std::span<const double> mu,
               std::span<const double> nu) {
    if (mu.size() != nu.size()) {
        throw domain_error("fy_loss: dimension mismatch");
    }
    double dot = 0;
    for (std::size_t i = 0; i < mu.size(); ++i) dot += mu[i] * nu[i];
    return eval(omega, mu) + eval(conjugate(omega), nu) - dot;
}

EquivalenceConstants equivalence_constants(const NormPower& f, std::size_t m) {
    if (m < 1) throw domain_error("equivalence_constants: dimension must be >= 1");
    const NormPower fc = conjugate(f);
    std::vector<double> e(m, 0.0);
    double sum_primal = 0, sum_conj = 0;
    for (std::size_t i = 0; i < m; ++i) {
        e[i] = 1.0;
        const double np = normalized(f, e);
        const double nc = normalized(fc, e);
        sum_primal += np * np;
        sum_conj += nc * nc;
        e[i] = 0.0;
    }
    EquivalenceConstants c;
    c.lo = 1.0 / (std::sqrt(static_cast<double>(m)) * std::sqrt(sum_conj));
    c.hi = std::sqrt(sum_primal);
    return c;
}

PowerLinearMin minimize_power_linear(double a, double b, double r) {
    if (!(a > 0) || !(b > 0)) throw domain_error("minimize_power_linear: a, b must be > 0");
    if (!(r > 1)) throw domain_error("minimize_power_linear: r must be > 1");
    const double s = r / (r - 1.0);
    PowerLinearMin out;
    out.argmin = std::pow(b / (r * a), s - 1.0);
    out.min_value = -std::pow(b, s) * std::pow(r * a, 1.0 - s) / s;
    return out;
}

double omega_norm(const NormPower& omega, std::span<const double> x) {
    validate(omega);
    double l2sq = 0;
    for (double v : x) l2sq += v * v;
    if (l2sq == 0) return 0.0; // limit convention at the origin
    const double rc = conjugate_order(omega.order);
    return std::pow(rc, -1.0 / rc) * l2sq / normalized(omega, x);
}

RelaxedBound make_relaxed(NormPower power, double relaxation) {
    if (!(relaxation >= 0)) throw domain_error("relaxation must be non-negative");
    return RelaxedBound{power, relaxation};
}

} // namespace normbound
