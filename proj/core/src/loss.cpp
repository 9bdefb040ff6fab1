#include "normbound/loss.hpp"

#include "normbound/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace normbound {

namespace {

void check_dims(std::span<const double> f, std::span<const double> y) {
    if (f.size() != y.size()) throw domain_error("loss: output/target dimension mismatch");
    if (f.empty()) throw domain_error("loss: empty output");
}

void check_ce_target(std::span<const double> y) {
    double sum = 0;
    for (double v : y) {
        if (v < 0.0 || v > 1.0) throw domain_error("softmax_ce: target must be a probability vector");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw domain_error("softmax_ce: target components must sum to 1");
    }
}

double sign0(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

} // namespace

LossKind parse_loss_kind(const std::string& name, double beta, int k) {
    LossKind out;
    out.beta = beta;
    out.k = k;
    if (name == "mse") out.tag = LossKind::Tag::mse;
    else if (name == "softmax_ce") out.tag = LossKind::Tag::softmax_ce;
    else if (name == "l1") out.tag = LossKind::Tag::l1;
    else if (name == "smooth_l1") out.tag = LossKind::Tag::smooth_l1;
    else if (name == "pnorm_pow") out.tag = LossKind::Tag::pnorm_pow;
    else throw config_error("unknown loss kind '" + name + "'");
    if (out.tag == LossKind::Tag::smooth_l1 && !(beta > 0)) {
        throw config_error("smooth_l1 requires beta > 0");
    }
    if (out.tag == LossKind::Tag::pnorm_pow && (k < 1 || k > 6)) {
        throw config_error("pnorm_pow requires integer k in [1, 6]");
    }
    return out;
}

std::string loss_name(const LossKind& kind) {
    switch (kind.tag) {
        case LossKind::Tag::mse: return "mse";
        case LossKind::Tag::softmax_ce: return "softmax_ce";
        case LossKind::Tag::l1: return "l1";
        case LossKind::Tag::smooth_l1: return "smooth_l1";
        case LossKind::Tag::pnorm_pow: return "pnorm_pow" + std::to_string(kind.k);
    }
    return "?";
}

std::vector<double> softmax(std::span<const double> f) {
    std::vector<double> p(f.size());
    const double m = *std::max_element(f.begin(), f.end());
    double sum = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        p[i] = std::exp(f[i] - m);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

double loss_eval(const LossKind& kind, std::span<const double> f,
                 std::span<const double> y) {
    check_dims(f, y);
    switch (kind.tag) {
        case LossKind::Tag::mse: {
            double s = 0;
            for (std::size_t i = 0; i < f.size(); ++i) s += (f[i] - y[i]) * (f[i] - y[i]);
            return 0.5 * s;
        }
        case LossKind::Tag::softmax_ce: {
            check_ce_target(y);
            // lse(f) - <y, f>, stable under shifts
            const double m = *std::max_element(f.begin(), f.end());
            double sum = 0;
            for (double v : f) sum += std::exp(v - m);
            const double lse = m + std::log(sum);
            double dot = 0;
            for (std::size_t i = 0; i < f.size(); ++i) dot += y[i] * f[i];
            return lse - dot;
        }
        case LossKind::Tag::l1: {
            double s = 0;
            for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f[i] - y[i]);
            return s;
        }
        case LossKind::Tag::smooth_l1: {
            double s = 0;
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double d = std::abs(f[i] - y[i]);
                s += d < kind.beta ? 0.5 * d * d / kind.beta : d - 0.5 * kind.beta;
            }
            return s;
        }
        case LossKind::Tag::pnorm_pow: {
            double s = 0;
            for (std::size_t i = 0; i < f.size(); ++i) {
                s += std::pow(std::abs(f[i] - y[i]), static_cast<double>(kind.k));
            }
            return s;
        }
    }
    return 0;
}

std::vector<double> loss_grad_output(const LossKind& kind, std::span<const double> f,
                                     std::span<const double> y) {
    check_dims(f, y);
    std::vector<double> g(f.size());
    switch (kind.tag) {
        case LossKind::Tag::mse:
            for (std::size_t i = 0; i < f.size(); ++i) g[i] = f[i] - y[i];
            break;
        case LossKind::Tag::softmax_ce: {
            check_ce_target(y);
            auto p = softmax(f);
            for (std::size_t i = 0; i < f.size(); ++i) g[i] = p[i] - y[i];
            break;
        }
        case LossKind::Tag::l1:
            for (std::size_t i = 0; i < f.size(); ++i) g[i] = sign0(f[i] - y[i]);
            break;
        case LossKind::Tag::smooth_l1:
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double d = f[i] - y[i];
                g[i] = std::abs(d) < kind.beta ? d / kind.beta : sign0(d);
            }
            break;
        case LossKind::Tag::pnorm_pow: {
            const double k = static_cast<double>(kind.k);
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double d = f[i] - y[i];
                g[i] = kind.k == 1 ? sign0(d)
                                   : k * std::pow(std::abs(d), k - 1.0) * sign0(d);
            }
            break;
        }
    }
    return g;
}

SmoothnessProfile profile(const LossKind& kind, const BatchContext& ctx,
                          const std::optional<EmpiricalTriple>& fitted) {
    SmoothnessProfile out;
    switch (kind.tag) {
        case LossKind::Tag::mse: {
            const NormPower half_sq = make_power(Norm::l2, 2.0, 0.5);
            out.convex_part = make_relaxed(half_sq, 0.0);
            out.smooth_part = make_relaxed(half_sq, 0.0);
            return out;
        }
        case LossKind::Tag::softmax_ce: {
            if (!(ctx.softmax_q_min > 0.0)) {
                throw numeric_error("softmax_ce profile: batch q_min must be positive");
            }
            out.convex_part =
                make_relaxed(make_power(Norm::l1, 2.0, 1.0 / (2.0 * std::numbers::ln2)), 0.0);
            out.smooth_part =
                make_relaxed(make_power(Norm::l2, 2.0, 1.0 / ctx.softmax_q_min), 0.0);
            out.data_dependent = true;
            return out;
        }
        case LossKind::Tag::pnorm_pow:
            if (kind.k == 2) {
                // ||f - y||_2^2 is exactly one norm power; no relaxation needed.
                const NormPower sq = make_power(Norm::l2, 2.0, 1.0);
                out.convex_part = make_relaxed(sq, 0.0);
                out.smooth_part = make_relaxed(sq, 0.0);
                return out;
            }
            [[fallthrough]];
        case LossKind::Tag::l1:
        case LossKind::Tag::smooth_l1: {
            // No exact constants exist for these; fall back to a fitted
            // (a, r, c) triple, by default a unit power with the order and
            // norm family matched to the loss (clamped to order 2 where the
            // raw power would not exceed 1).
            EmpiricalTriple t;
            if (fitted) {
                t = *fitted;
            } else if (kind.tag == LossKind::Tag::pnorm_pow) {
                t.r = std::max(2.0, static_cast<double>(kind.k));
            }
            if (!(t.r > 1.0)) throw config_error("empirical profile order must be > 1");
            NormPower power;
            if (kind.tag == LossKind::Tag::pnorm_pow && kind.k > 2) {
                power = make_lp_power(static_cast<double>(kind.k), t.r, t.a);
            } else if (kind.tag == LossKind::Tag::l1 ||
                       (kind.tag == LossKind::Tag::pnorm_pow && kind.k == 1)) {
                power = make_power(Norm::l1, t.r, t.a);
            } else {
                power = make_power(Norm::l2, t.r, t.a);
            }
            out.convex_part = make_relaxed(power, t.c);
            out.smooth_part = make_relaxed(power, t.c);
            out.empirical = true;
            return out;
        }
    }
    return out;
}

} // namespace normbound
