#include "normbound/diagnostics.hpp"

#include "normbound/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace normbound {

namespace {

double off_diagonal_frobenius(const SymmetricMatrix& a) {
    double s = 0;
    for (std::size_t i = 0; i < a.n; ++i) {
        for (std::size_t j = i + 1; j < a.n; ++j) {
            s += 2.0 * a.at(i, j) * a.at(i, j);
        }
    }
    return std::sqrt(s);
}

double frobenius(const SymmetricMatrix& a) {
    double s = 0;
    for (double v : a.data) s += v * v;
    return std::sqrt(s);
}

void check_symmetric(const SymmetricMatrix& a) {
    for (std::size_t i = 0; i < a.n; ++i) {
        for (std::size_t j = i + 1; j < a.n; ++j) {
            if (std::abs(a.at(i, j) - a.at(j, i)) > 1e-9 * std::max(1.0, frobenius(a))) {
                throw domain_error("sym_eigenvalues: matrix is not symmetric");
            }
        }
    }
}

// One threaded reduction helper; results land in caller-indexed slots so the
// serial reduction order is independent of the thread count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned t = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < t; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace

SymmetricMatrix gram_of(const Jacobian& j) {
    SymmetricMatrix a;
    a.n = j.mf;
    a.data.assign(j.mf * j.mf, 0.0);
    for (std::size_t i = 0; i < j.mf; ++i) {
        const auto ci = j.column(i);
        for (std::size_t k = i; k < j.mf; ++k) {
            const auto ck = j.column(k);
            double dot = 0;
            for (std::size_t t = 0; t < j.theta_count; ++t) dot += ci[t] * ck[t];
            a.at(i, k) = dot;
            a.at(k, i) = dot;
        }
    }
    return a;
}

SymmetricMatrix structural_matrix(const ParamModel& model, std::span<const double> theta,
                                  std::span<const double> x) {
    return gram_of(jacobian_params(model, theta, x));
}

std::vector<double> sym_eigenvalues(const SymmetricMatrix& a, double tol, int max_sweeps) {
    if (a.n == 0) throw domain_error("sym_eigenvalues: empty matrix");
    check_symmetric(a);
    if (tol < 0) tol = 1e-10 * frobenius(a);

    SymmetricMatrix m = a;
    const std::size_t n = m.n;
    if (n == 1) return {m.at(0, 0)};

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_diagonal_frobenius(m) <= tol) break;
        if (sweep == max_sweeps - 1) {
            throw numeric_error("sym_eigenvalues: Jacobi sweeps did not converge");
        }
        for (std::size_t p = 0; p < n - 1; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m.at(p, q);
                if (apq == 0.0) continue;
                const double app = m.at(p, p);
                const double aqq = m.at(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = m.at(k, p);
                    const double akq = m.at(k, q);
                    m.at(k, p) = c * akp - s * akq;
                    m.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = m.at(p, k);
                    const double aqk = m.at(q, k);
                    m.at(p, k) = c * apk - s * aqk;
                    m.at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }

    std::vector<double> eigs(n);
    for (std::size_t i = 0; i < n; ++i) eigs[i] = m.at(i, i);
    std::sort(eigs.begin(), eigs.end());
    return eigs;
}

std::vector<GershgorinDisc> gershgorin_bounds(const SymmetricMatrix& a) {
    std::vector<GershgorinDisc> discs(a.n);
    for (std::size_t i = 0; i < a.n; ++i) {
        discs[i].center = a.at(i, i);
        double r = 0;
        for (std::size_t j = 0; j < a.n; ++j) {
            if (j != i) r += std::abs(a.at(i, j));
        }
        discs[i].radius = r;
    }
    return discs;
}

StructuralError structural_error(std::span<const double> eigs,
                                 const StructuralWeights& weights, double floor) {
    if (eigs.empty()) throw domain_error("structural_error: empty spectrum");
    const double lmin = *std::min_element(eigs.begin(), eigs.end());
    const double lmax = *std::max_element(eigs.begin(), eigs.end());
    StructuralError e;
    e.degenerate = lmin < floor;
    e.u = -std::log(std::max(lmin, floor));
    e.l = -std::log(std::max(lmax, floor));
    e.d = e.u - e.l;
    e.s = weights.alpha * e.d + weights.beta * e.u + weights.gamma * e.l;
    return e;
}

BoundConstants bound_constants(const SmoothnessProfile& profile, std::size_t mf) {
    if (mf == 0) throw domain_error("bound_constants: output dimension must be positive");
    const NormPower& smooth = profile.smooth_part.power;
    const NormPower conj_convex = conjugate(profile.convex_part.power);
    const double rc = conjugate_order(smooth.order);

    std::vector<double> e(mf, 0.0);
    double sum_smooth = 0, sum_conj_convex = 0;
    for (std::size_t i = 0; i < mf; ++i) {
        e[i] = 1.0;
        const double ns = normalized(smooth, e);
        const double nc = normalized(conj_convex, e);
        sum_smooth += ns * ns;
        sum_conj_convex += nc * nc;
        e[i] = 0.0;
    }

    BoundConstants c;
    c.r_conj = rc;
    c.c_lower = (1.0 / rc) * std::pow(static_cast<double>(mf), -rc / 2.0) *
                std::pow(sum_smooth, -rc / 2.0);
    c.c_upper = (1.0 / rc) * std::pow(sum_conj_convex, rc / 2.0);
    return c;
}

namespace {

double eig_floor(double lambda_max, double scale) {
    return scale * std::max(lambda_max, 1.0);
}

} // namespace

StructuralReport sample_report(const ParamModel& model, std::span<const double> theta,
                               std::span<const double> x, std::span<const double> y,
                               const LossKind& kind, const SmoothnessProfile& profile,
                               const DiagnosticsOptions& opts) {
    auto fwd = forward(model, theta, x);
    const auto grad_f = loss_grad_output(kind, fwd.output, y);

    StructuralReport r;
    r.loss = loss_eval(kind, fwd.output, y);

    const auto grad_theta = vjp_params(fwd.tape, grad_f);
    double g2 = 0;
    for (double v : grad_theta) g2 += v * v;
    r.grad_theta_norm2 = std::sqrt(g2);

    const auto a = gram_of(jacobian_params(model, theta, x));
    r.eigenvalues = sym_eigenvalues(a, opts.jacobi_tol_scale * frobenius(a), opts.max_sweeps);
    r.lambda_min = r.eigenvalues.front();
    r.lambda_max = r.eigenvalues.back();

    const double floor = eig_floor(r.lambda_max, opts.eig_floor_scale);
    r.err = structural_error(r.eigenvalues, opts.weights, floor);
    r.degenerate = r.err.degenerate;

    const auto c = bound_constants(profile, fwd.output.size());
    r.local_grad_norm_r = std::pow(r.grad_theta_norm2, c.r_conj);

    const double lmax = std::max(r.lambda_max, floor);
    r.lower_bound = r.lambda_max <= floor && r.grad_theta_norm2 == 0.0
                        ? -profile.smooth_part.relaxation
                        : c.c_lower * r.local_grad_norm_r / std::pow(lmax, c.r_conj / 2.0) -
                              profile.smooth_part.relaxation;
    r.upper_bound = r.degenerate
                        ? std::numeric_limits<double>::infinity()
                        : c.c_upper * r.local_grad_norm_r / std::pow(r.lambda_min, c.r_conj / 2.0) +
                              profile.convex_part.relaxation;
    return r;
}

DatasetStructural dataset_structural(const ParamModel& model, std::span<const double> theta,
                                     std::span<const DatasetSample> samples,
                                     const DiagnosticsOptions& opts) {
    if (samples.empty()) throw domain_error("dataset_structural: empty sample set");
    DatasetStructural out;
    out.lambda_min = std::numeric_limits<double>::infinity();
    out.lambda_max = -std::numeric_limits<double>::infinity();
    for (const auto& z : samples) {
        const auto a = gram_of(jacobian_params(model, theta, z.x));
        const auto eigs = sym_eigenvalues(a, opts.jacobi_tol_scale * frobenius(a), opts.max_sweeps);
        out.lambda_min = std::min(out.lambda_min, eigs.front());
        out.lambda_max = std::max(out.lambda_max, eigs.back());
    }
    const double floor = eig_floor(out.lambda_max, opts.eig_floor_scale);
    const double agg[2] = {out.lambda_min, out.lambda_max};
    out.err = structural_error(agg, opts.weights, floor);
    return out;
}

DatasetBounds dataset_bounds(const ParamModel& model, std::span<const double> theta,
                             std::span<const DatasetSample> samples, const LossKind& kind,
                             const SmoothnessProfile& profile,
                             const DiagnosticsOptions& opts, unsigned threads) {
    if (samples.empty()) throw domain_error("dataset_bounds: empty sample set");
    const auto c = bound_constants(profile, model.output_dim());

    struct PerSample {
        double loss = 0;
        double grad_r = 0;
        double lmin = 0;
        double lmax = 0;
    };
    std::vector<PerSample> per(samples.size());

    parallel_for(samples.size(), threads, [&](std::size_t i) {
        const auto& z = samples[i];
        auto fwd = forward(model, theta, z.x);
        const auto grad_f = loss_grad_output(kind, fwd.output, z.y);
        const auto grad_theta = vjp_params(fwd.tape, grad_f);
        double g2 = 0;
        for (double v : grad_theta) g2 += v * v;
        const auto a = gram_of(jacobian_params(model, theta, z.x));
        const auto eigs =
            sym_eigenvalues(a, opts.jacobi_tol_scale * frobenius(a), opts.max_sweeps);
        per[i] = PerSample{loss_eval(kind, fwd.output, z.y),
                           std::pow(std::sqrt(g2), c.r_conj), eigs.front(), eigs.back()};
    });

    DatasetBounds out;
    out.structural.lambda_min = std::numeric_limits<double>::infinity();
    out.structural.lambda_max = -std::numeric_limits<double>::infinity();
    for (const auto& p : per) {
        out.mean_loss += p.loss;
        out.mean_local_grad_norm_r += p.grad_r;
        out.structural.lambda_min = std::min(out.structural.lambda_min, p.lmin);
        out.structural.lambda_max = std::max(out.structural.lambda_max, p.lmax);
    }
    out.mean_loss /= static_cast<double>(samples.size());
    out.mean_local_grad_norm_r /= static_cast<double>(samples.size());

    const double floor = eig_floor(out.structural.lambda_max, opts.eig_floor_scale);
    const double agg[2] = {out.structural.lambda_min, out.structural.lambda_max};
    out.structural.err = structural_error(agg, opts.weights, floor);
    out.degenerate = out.structural.err.degenerate;

    const double lmax = std::max(out.structural.lambda_max, floor);
    const double lmin = std::max(out.structural.lambda_min, floor);
    out.lower = c.c_lower * out.mean_local_grad_norm_r / std::pow(lmax, c.r_conj / 2.0) -
                profile.smooth_part.relaxation;
    out.upper_floored = c.c_upper * out.mean_local_grad_norm_r / std::pow(lmin, c.r_conj / 2.0) +
                        profile.convex_part.relaxation;
    out.upper = out.degenerate ? std::numeric_limits<double>::infinity() : out.upper_floored;
    return out;
}

double local_grad_norm(const ParamModel& model, std::span<const double> theta,
                       std::span<const DatasetSample> samples, const LossKind& kind,
                       double r) {
    if (!(r > 1.0)) throw domain_error("local_grad_norm: r must be > 1");
    if (samples.empty()) return 0.0;
    double acc = 0;
    for (const auto& z : samples) {
        auto fwd = forward(model, theta, z.x);
        const auto grad_f = loss_grad_output(kind, fwd.output, z.y);
        const auto grad_theta = vjp_params(fwd.tape, grad_f);
        double g2 = 0;
        for (double v : grad_theta) g2 += v * v;
        acc += std::pow(std::sqrt(g2), r);
    }
    return acc / static_cast<double>(samples.size());
}

std::pair<double, double> output_space_bounds(const SmoothnessProfile& profile,
                                              std::span<const double> grad_f) {
    const NormPower smooth_conj = conjugate(profile.smooth_part.power);
    const NormPower convex_conj = conjugate(profile.convex_part.power);
    const double lower = eval(smooth_conj, grad_f) - profile.smooth_part.relaxation;
    const double upper = eval(convex_conj, grad_f) + profile.convex_part.relaxation;
    return {lower, upper};
}

BatchContext batch_context(const ParamModel& model, std::span<const double> theta,
                           std::span<const DatasetSample> samples, const LossKind& kind) {
    BatchContext ctx;
    if (kind.tag != LossKind::Tag::softmax_ce) return ctx;
    double qmin = std::numeric_limits<double>::infinity();
    for (const auto& z : samples) {
        auto fwd = forward(model, theta, z.x);
        const auto p = softmax(fwd.output);
        for (double v : p) qmin = std::min(qmin, v);
    }
    if (!(qmin > 0.0)) throw numeric_error("batch_context: softmax produced a zero component");
    ctx.softmax_q_min = qmin;
    return ctx;
}

} // namespace normbound
