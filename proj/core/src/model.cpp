#include "normbound/model.hpp"

#include "normbound/errors.hpp"
#include "normbound/rng.hpp"

#include <cmath>

namespace normbound {

std::size_t ParamModel::output_dim() const {
    if (head) return head->out;
    return config.block_count > 0 ? config.hidden_width : config.input_dim;
}

ParamModel build(const ModelConfig& config) {
    if (config.input_dim == 0) throw config_error("model: input_dim must be positive");
    if (config.output_dim == 0) throw config_error("model: output_dim must be positive");
    if (config.block_count > 0 && config.hidden_width == 0) {
        throw config_error("model: hidden_width must be positive when block_count > 0");
    }
    if (!(config.dropout_rate >= 0.0 && config.dropout_rate < 1.0)) {
        throw config_error("model: dropout_rate must lie in [0, 1)");
    }
    if (config.head == ModelConfig::Head::none) {
        const std::size_t tail = config.block_count > 0 ? config.hidden_width : config.input_dim;
        if (tail != config.output_dim) {
            throw config_error("model: head=none requires output_dim to equal the last width");
        }
    }

    ParamModel m;
    m.config = config;
    std::size_t off = 0;
    auto alloc = [&off](std::size_t in, std::size_t out) {
        AffineSpec a{off, off + in * out, in, out};
        off += in * out + out;
        return a;
    };

    if (config.block_count > 0) {
        m.stem = alloc(config.input_dim, config.hidden_width);
        for (std::size_t i = 0; i < config.block_count; ++i) {
            m.blocks.push_back(alloc(config.hidden_width, config.hidden_width));
        }
    }
    if (config.skip_connections) {
        for (const auto& b : m.blocks) {
            if (b.in != b.out) {
                throw config_error("model: skip connections require equal block widths");
            }
        }
    }
    if (config.head == ModelConfig::Head::linear) {
        const std::size_t in = config.block_count > 0 ? config.hidden_width : config.input_dim;
        m.head = alloc(in, config.output_dim);
    }
    m.theta_count = off;
    if (m.theta_count == 0) throw config_error("model: no parameters (k=0 with head=none)");
    return m;
}

namespace {

void fill_affine(const AffineSpec& a, const InitScheme& scheme, Rng& rng,
                 std::vector<double>& theta) {
    const double fan_in = static_cast<double>(a.in);
    const double fan_out = static_cast<double>(a.out);
    for (std::size_t i = 0; i < a.in * a.out; ++i) {
        double w;
        if (scheme.kind == InitScheme::Kind::he) {
            w = rng.normal(0.0, std::sqrt(2.0 / fan_in));
        } else {
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            w = rng.uniform(-bound, bound);
        }
        theta[a.w_offset + i] = w;
    }
    // biases stay zero
}

} // namespace

std::vector<double> init(const ParamModel& model, const InitScheme& scheme) {
    std::vector<double> theta(model.theta_count, 0.0);
    Rng rng(scheme.seed);
    if (model.stem) fill_affine(*model.stem, scheme, rng, theta);
    for (const auto& b : model.blocks) fill_affine(b, scheme, rng, theta);
    if (model.head) fill_affine(*model.head, scheme, rng, theta);
    return theta;
}

} // namespace normbound
