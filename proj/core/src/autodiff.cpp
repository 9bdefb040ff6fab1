#include "normbound/autodiff.hpp"

#include "normbound/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace normbound {

TapeBuilder::TapeBuilder(std::span<const double> theta) {
    tape_.theta.assign(theta.begin(), theta.end());
    tape_.theta_count = theta.size();
}

int TapeBuilder::push(TapeNode node) {
    for (double v : node.value) {
        if (!std::isfinite(v)) {
            throw numeric_error("forward: non-finite value in " + node.label);
        }
    }
    tape_.nodes.push_back(std::move(node));
    return static_cast<int>(tape_.nodes.size()) - 1;
}

int TapeBuilder::input(std::span<const double> x) {
    TapeNode n;
    n.kind = OpKind::input;
    n.value.assign(x.begin(), x.end());
    n.label = "input";
    return push(std::move(n));
}

int TapeBuilder::affine(int src, const AffineSpec& spec, std::string label) {
    if (spec.w_offset + spec.in * spec.out > tape_.theta.size() ||
        spec.b_offset + spec.out > tape_.theta.size()) {
        throw domain_error("affine: parameter slice out of range in " + label);
    }
    const auto& h = tape_.nodes[src].value;
    if (h.size() != spec.in) {
        throw domain_error("affine: input width mismatch in " + label);
    }
    TapeNode n;
    n.kind = OpKind::affine;
    n.a = src;
    n.affine = spec;
    n.label = std::move(label);
    n.value.assign(spec.out, 0.0);
    for (std::size_t i = 0; i < spec.out; ++i) {
        double acc = tape_.theta[spec.b_offset + i];
        const double* w = tape_.theta.data() + spec.w_offset + i * spec.in;
        for (std::size_t j = 0; j < spec.in; ++j) acc += w[j] * h[j];
        n.value[i] = acc;
    }
    return push(std::move(n));
}

int TapeBuilder::activation(int src, Activation act, std::string label) {
    const auto& z = tape_.nodes[src].value;
    TapeNode n;
    n.a = src;
    n.label = std::move(label);
    n.value.resize(z.size());
    switch (act) {
        case Activation::relu:
            n.kind = OpKind::relu;
            for (std::size_t i = 0; i < z.size(); ++i) n.value[i] = z[i] > 0 ? z[i] : 0.0;
            break;
        case Activation::tanh:
            n.kind = OpKind::tanh;
            for (std::size_t i = 0; i < z.size(); ++i) n.value[i] = std::tanh(z[i]);
            break;
        case Activation::sigmoid:
            n.kind = OpKind::sigmoid;
            for (std::size_t i = 0; i < z.size(); ++i) {
                n.value[i] = 1.0 / (1.0 + std::exp(-z[i]));
            }
            break;
    }
    return push(std::move(n));
}

int TapeBuilder::softmax(int src, std::string label) {
    const auto& z = tape_.nodes[src].value;
    TapeNode n;
    n.kind = OpKind::softmax;
    n.a = src;
    n.label = std::move(label);
    n.value.resize(z.size());
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        n.value[i] = std::exp(z[i] - m);
        sum += n.value[i];
    }
    for (auto& v : n.value) v /= sum;
    return push(std::move(n));
}

int TapeBuilder::add(int lhs, int rhs, std::string label) {
    const auto& u = tape_.nodes[lhs].value;
    const auto& v = tape_.nodes[rhs].value;
    if (u.size() != v.size()) throw domain_error("add: dimension mismatch in " + label);
    TapeNode n;
    n.kind = OpKind::add;
    n.a = lhs;
    n.b = rhs;
    n.label = std::move(label);
    n.value.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) n.value[i] = u[i] + v[i];
    return push(std::move(n));
}

int TapeBuilder::concat(int lhs, int rhs, std::string label) {
    const auto& u = tape_.nodes[lhs].value;
    const auto& v = tape_.nodes[rhs].value;
    TapeNode n;
    n.kind = OpKind::concat;
    n.a = lhs;
    n.b = rhs;
    n.label = std::move(label);
    n.value.reserve(u.size() + v.size());
    n.value.insert(n.value.end(), u.begin(), u.end());
    n.value.insert(n.value.end(), v.begin(), v.end());
    return push(std::move(n));
}

int TapeBuilder::dropout(int src, double rate, Rng& rng, std::string label) {
    if (!(rate >= 0.0 && rate < 1.0)) throw domain_error("dropout rate must lie in [0, 1)");
    const auto& h = tape_.nodes[src].value;
    TapeNode n;
    n.kind = OpKind::dropout;
    n.a = src;
    n.label = std::move(label);
    n.value.resize(h.size());
    n.aux.resize(h.size());
    const double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < h.size(); ++i) {
        n.aux[i] = rng.uniform01() < rate ? 0.0 : keep_scale;
        n.value[i] = h[i] * n.aux[i];
    }
    return push(std::move(n));
}

Tape TapeBuilder::finish(int output_node) {
    Tape out = std::move(tape_);
    out.output_node = output_node;
    return out;
}

namespace {

ForwardResult run_forward(const ParamModel& model, std::span<const double> theta,
                          std::span<const double> x, double dropout_rate, Rng* rng) {
    if (theta.size() != model.theta_count) {
        throw domain_error("forward: theta length " + std::to_string(theta.size()) +
                           " does not match parameter count " +
                           std::to_string(model.theta_count));
    }
    if (x.size() != model.config.input_dim) {
        throw domain_error("forward: input length " + std::to_string(x.size()) +
                           " does not match input_dim " +
                           std::to_string(model.config.input_dim));
    }

    TapeBuilder b(theta);
    int h = b.input(x);
    const bool drop = dropout_rate > 0.0 && rng != nullptr;
    if (model.stem) {
        h = b.affine(h, *model.stem, "stem");
        h = b.activation(h, model.config.activation, "stem activation");
        if (drop) h = b.dropout(h, dropout_rate, *rng, "stem dropout");
    }
    for (std::size_t i = 0; i < model.blocks.size(); ++i) {
        const std::string tag = "block " + std::to_string(i);
        int t = b.affine(h, model.blocks[i], tag);
        t = b.activation(t, model.config.activation, tag + " activation");
        if (drop) t = b.dropout(t, dropout_rate, *rng, tag + " dropout");
        h = model.config.skip_connections ? b.add(h, t, tag + " skip") : t;
    }
    if (model.head) h = b.affine(h, *model.head, "head");

    ForwardResult out;
    const auto value = b.value(h);
    out.output.assign(value.begin(), value.end());
    out.tape = b.finish(h);
    return out;
}

} // namespace

ForwardResult forward(const ParamModel& model, std::span<const double> theta,
                      std::span<const double> x) {
    return run_forward(model, theta, x, 0.0, nullptr);
}

std::vector<double> vjp_params(const Tape& tape, std::span<const double> cotangent) {
    if (tape.output_node < 0) throw domain_error("vjp_params: empty tape");
    if (cotangent.size() != tape.output_dim()) {
        throw domain_error("vjp_params: cotangent length does not match output dimension");
    }

    std::vector<double> grad_theta(tape.theta_count, 0.0);
    std::vector<std::vector<double>> adjoint(tape.nodes.size());
    adjoint[tape.output_node].assign(cotangent.begin(), cotangent.end());

    auto bump = [&adjoint](int node, std::size_t size) -> std::vector<double>& {
        auto& a = adjoint[node];
        if (a.empty()) a.assign(size, 0.0);
        return a;
    };

    for (int i = static_cast<int>(tape.nodes.size()) - 1; i >= 0; --i) {
        const TapeNode& n = tape.nodes[i];
        const auto& u = adjoint[i];
        if (u.empty()) continue;
        switch (n.kind) {
            case OpKind::input:
                break;
            case OpKind::affine: {
                const auto& h = tape.nodes[n.a].value;
                auto& ha = bump(n.a, h.size());
                // theta layout is row-major (out x in)
                for (std::size_t r = 0; r < n.affine.out; ++r) {
                    const double ur = u[r];
                    if (ur == 0.0) continue;
                    double* gw = grad_theta.data() + n.affine.w_offset + r * n.affine.in;
                    const double* w = tape.theta.data() + n.affine.w_offset + r * n.affine.in;
                    for (std::size_t c = 0; c < n.affine.in; ++c) {
                        gw[c] += ur * h[c];
                        ha[c] += ur * w[c];
                    }
                    grad_theta[n.affine.b_offset + r] += ur;
                }
                break;
            }
            case OpKind::relu: {
                const auto& z = tape.nodes[n.a].value;
                auto& ha = bump(n.a, z.size());
                for (std::size_t j = 0; j < z.size(); ++j) ha[j] += z[j] > 0 ? u[j] : 0.0;
                break;
            }
            case OpKind::tanh: {
                auto& ha = bump(n.a, n.value.size());
                for (std::size_t j = 0; j < n.value.size(); ++j) {
                    ha[j] += u[j] * (1.0 - n.value[j] * n.value[j]);
                }
                break;
            }
            case OpKind::sigmoid: {
                auto& ha = bump(n.a, n.value.size());
                for (std::size_t j = 0; j < n.value.size(); ++j) {
                    ha[j] += u[j] * n.value[j] * (1.0 - n.value[j]);
                }
                break;
            }
            case OpKind::softmax: {
                auto& ha = bump(n.a, n.value.size());
                double dot = 0;
                for (std::size_t j = 0; j < n.value.size(); ++j) dot += u[j] * n.value[j];
                for (std::size_t j = 0; j < n.value.size(); ++j) {
                    ha[j] += n.value[j] * (u[j] - dot);
                }
                break;
            }
            case OpKind::add: {
                auto& la = bump(n.a, n.value.size());
                auto& ra = bump(n.b, n.value.size());
                for (std::size_t j = 0; j < n.value.size(); ++j) {
                    la[j] += u[j];
                    ra[j] += u[j];
                }
                break;
            }
            case OpKind::concat: {
                const auto& lv = tape.nodes[n.a].value;
                const auto& rv = tape.nodes[n.b].value;
                auto& la = bump(n.a, lv.size());
                auto& ra = bump(n.b, rv.size());
                for (std::size_t j = 0; j < lv.size(); ++j) la[j] += u[j];
                for (std::size_t j = 0; j < rv.size(); ++j) ra[j] += u[lv.size() + j];
                break;
            }
            case OpKind::dropout: {
                auto& ha = bump(n.a, n.value.size());
                for (std::size_t j = 0; j < n.value.size(); ++j) ha[j] += u[j] * n.aux[j];
                break;
            }
        }
    }
    return grad_theta;
}

Jacobian jacobian_params(const ParamModel& model, std::span<const double> theta,
                         std::span<const double> x, std::size_t budget_bytes) {
    auto fwd = forward(model, theta, x);
    const std::size_t mf = fwd.output.size();
    const std::size_t bytes = model.theta_count * mf * sizeof(double);
    if (bytes > budget_bytes) {
        throw domain_error("jacobian_params: dense Jacobian of " + std::to_string(bytes) +
                           " bytes exceeds the budget of " + std::to_string(budget_bytes));
    }
    Jacobian j;
    j.theta_count = model.theta_count;
    j.mf = mf;
    j.data.resize(model.theta_count * mf);
    std::vector<double> e(mf, 0.0);
    for (std::size_t i = 0; i < mf; ++i) {
        e[i] = 1.0;
        auto col = vjp_params(fwd.tape, e);
        std::copy(col.begin(), col.end(), j.data.begin() + i * j.theta_count);
        e[i] = 0.0;
    }
    return j;
}

DropoutEvaluator::DropoutEvaluator(const ParamModel& model, double rate, std::uint64_t seed)
    : model_(&model), rate_(rate), rng_(seed) {
    if (!(rate >= 0.0 && rate < 1.0)) throw domain_error("dropout rate must lie in [0, 1)");
}

ForwardResult DropoutEvaluator::forward(std::span<const double> theta,
                                        std::span<const double> x) {
    return run_forward(*model_, theta, x, rate_, &rng_);
}

DropoutEvaluator apply_dropout(const ParamModel& model, double rate, std::uint64_t seed) {
    return DropoutEvaluator(model, rate, seed);
}

} // namespace normbound
