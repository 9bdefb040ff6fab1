#include "normbound/gicstat.hpp"

#include "normbound/errors.hpp"
#include "normbound/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace normbound {

std::vector<double> sample_ball(std::size_t m, std::size_t n, double epsilon,
                                std::uint64_t seed) {
    if (m < 1 || n < 1) throw domain_error("sample_ball: m and n must be >= 1");
    if (!(epsilon > 0)) throw domain_error("sample_ball: epsilon must be positive");
    Rng rng(seed);
    std::vector<double> pts(m * n);
    for (std::size_t i = 0; i < n; ++i) {
        double* p = pts.data() + i * m;
        double norm2 = 0;
        for (std::size_t j = 0; j < m; ++j) {
            p[j] = rng.normal();
            norm2 += p[j] * p[j];
        }
        const double norm = std::sqrt(norm2);
        const double radius =
            epsilon * std::pow(rng.uniform01_open0(), 1.0 / static_cast<double>(m));
        const double s = norm > 0 ? radius / norm : 0.0;
        for (std::size_t j = 0; j < m; ++j) p[j] *= s;
    }
    return pts;
}

GicReport concentration_check(std::span<const double> points, std::size_t n, std::size_t m,
                              double pass_margin) {
    if (m < 2) throw domain_error("concentration_check: inner-product bound needs m >= 2");
    if (n < 1 || points.size() != n * m) {
        throw domain_error("concentration_check: point buffer does not match n x m");
    }

    GicReport rep;
    rep.n_columns = n;
    rep.dim = m;
    rep.epsilon = 1.0;

    const double norm_floor =
        1.0 - 2.0 * std::log(static_cast<double>(n)) / static_cast<double>(m);
    const double inner_ceil = std::sqrt(6.0 * std::log(static_cast<double>(n))) /
                              std::sqrt(static_cast<double>(m) - 1.0);

    std::vector<double> norms(n);
    std::size_t norm_ok = 0;
    rep.min_norm = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double* p = points.data() + i * m;
        double s = 0;
        for (std::size_t j = 0; j < m; ++j) s += p[j] * p[j];
        norms[i] = std::sqrt(s);
        rep.min_norm = std::min(rep.min_norm, norms[i]);
        if (norms[i] >= norm_floor) ++norm_ok;
    }
    rep.fraction_norm_ok = static_cast<double>(norm_ok) / static_cast<double>(n);

    std::size_t pairs = 0, inner_ok = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* pi = points.data() + i * m;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* pj = points.data() + j * m;
            double dot = 0;
            for (std::size_t k = 0; k < m; ++k) dot += pi[k] * pj[k];
            rep.max_abs_inner = std::max(rep.max_abs_inner, std::abs(dot));
            if (std::abs(dot) <= inner_ceil) ++inner_ok;
            ++pairs;
        }
    }
    rep.fraction_inner_ok =
        pairs == 0 ? 1.0 : static_cast<double>(inner_ok) / static_cast<double>(pairs);

    const double threshold = 1.0 - pass_margin / static_cast<double>(n);
    rep.passes = rep.fraction_norm_ok >= threshold && rep.fraction_inner_ok >= threshold;
    return rep;
}

GicReport gic_check(const Jacobian& j, double epsilon, double pass_margin) {
    if (j.mf == 0 || j.theta_count == 0) throw domain_error("gic_check: empty Jacobian");
    double eps = epsilon;
    if (!(eps > 0)) {
        for (std::size_t i = 0; i < j.mf; ++i) {
            double s = 0;
            for (double v : j.column(i)) s += v * v;
            eps = std::max(eps, std::sqrt(s));
        }
    }
    if (!(eps > 0)) {
        // all-zero Jacobian: report a failing check rather than divide by zero
        GicReport rep;
        rep.n_columns = j.mf;
        rep.dim = j.theta_count;
        rep.epsilon = 0;
        rep.min_norm = 0;
        rep.passes = false;
        return rep;
    }
    std::vector<double> scaled(j.data.size());
    // concentration_check expects point-major rows; columns are contiguous already
    for (std::size_t i = 0; i < j.mf; ++i) {
        const auto col = j.column(i);
        for (std::size_t t = 0; t < j.theta_count; ++t) {
            scaled[i * j.theta_count + t] = col[t] / eps;
        }
    }
    GicReport rep = concentration_check(scaled, j.mf, j.theta_count, pass_margin);
    rep.epsilon = eps;
    rep.min_norm *= eps;
    return rep;
}

double z_factor(std::size_t theta_count, std::size_t mf) {
    if (mf < 2) throw domain_error("z_factor: output dimension must be >= 2");
    if (theta_count < mf + 1) throw domain_error("z_factor: requires m_f <= |theta| - 1");
    const double mfd = static_cast<double>(mf);
    const double td = static_cast<double>(theta_count);
    const double shrink = 1.0 - 2.0 * std::log(mfd) / td;
    return 2.0 * mfd * std::sqrt(6.0 * std::log(mfd)) / std::sqrt(td - 1.0) * shrink * shrink;
}

PredictedStructuralBounds predicted_structural_bounds(std::size_t theta_count, std::size_t mf,
                                                      double epsilon) {
    if (!(epsilon > 0)) throw domain_error("predicted_structural_bounds: epsilon must be > 0");
    const double z = z_factor(theta_count, mf);
    const double shrink =
        1.0 - 2.0 * std::log(static_cast<double>(mf)) / static_cast<double>(theta_count);
    PredictedStructuralBounds b;
    b.u_max = -2.0 * std::log(shrink) - 2.0 * std::log(epsilon);
    b.d_max = std::log(z + 1.0);
    return b;
}

double pearson(std::span<const double> x, std::span<const double> y, bool* zero_variance) {
    if (x.size() != y.size() || x.size() < 2) throw domain_error("pearson: need two equal series");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (zero_variance) *zero_variance = false;
    if (sxx == 0.0 || syy == 0.0) {
        if (zero_variance) *zero_variance = true;
        return 0.0;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

SlidingPearson sliding_pearson(std::span<const double> x, std::span<const double> y,
                               std::size_t window) {
    if (x.size() != y.size()) throw domain_error("sliding_pearson: series length mismatch");
    if (window < 2) throw domain_error("sliding_pearson: window must be >= 2");
    if (x.size() < window) throw domain_error("sliding_pearson: series shorter than window");
    SlidingPearson out;
    const std::size_t count = x.size() - window + 1;
    out.values.resize(count);
    out.zero_variance.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        bool flag = false;
        out.values[i] = pearson(x.subspan(i, window), y.subspan(i, window), &flag);
        out.zero_variance[i] = flag;
    }
    return out;
}

} // namespace normbound
