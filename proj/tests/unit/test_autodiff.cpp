#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "normbound/autodiff.hpp"
#include "normbound/errors.hpp"
#include "normbound/model.hpp"
#include "support/testmodels.hpp"

#include <cmath>
#include <cstring>

using namespace normbound;

namespace {

ParamModel linear_model(std::size_t in, std::size_t out) {
    ModelConfig c;
    c.input_dim = in;
    c.output_dim = out;
    return build(c);
}

} // namespace

TEST_CASE("forward of a plain linear layer") {
    const ParamModel m = linear_model(2, 2);
    // W = I, b = 0
    std::vector<double> theta(m.theta_count, 0.0);
    theta[m.head->w_offset + 0] = 1.0;
    theta[m.head->w_offset + 3] = 1.0;
    const std::vector<double> x{1, 2};
    CHECK(forward(m, theta, x).output == std::vector<double>{1, 2});

    // W = 0, b = (3, 3)
    std::fill(theta.begin(), theta.end(), 0.0);
    theta[m.head->b_offset + 0] = 3.0;
    theta[m.head->b_offset + 1] = 3.0;
    const std::vector<double> any{-5, 11};
    CHECK(forward(m, theta, any).output == std::vector<double>{3, 3});
}

TEST_CASE("two-layer relu network matches a hand evaluation") {
    ModelConfig c;
    c.input_dim = 2;
    c.output_dim = 1;
    c.block_count = 1;
    c.hidden_width = 2;
    c.activation = Activation::relu;
    const ParamModel m = build(c);
    std::vector<double> theta(m.theta_count);
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = 0.1 * (double(i) - 3.0);

    // independent direct evaluation without the tape
    auto affine = [&theta](const AffineSpec& a, const std::vector<double>& h) {
        std::vector<double> out(a.out);
        for (std::size_t i = 0; i < a.out; ++i) {
            double acc = theta[a.b_offset + i];
            for (std::size_t j = 0; j < a.in; ++j) acc += theta[a.w_offset + i * a.in + j] * h[j];
            out[i] = acc;
        }
        return out;
    };
    auto relu = [](std::vector<double> v) {
        for (auto& x : v) x = x > 0 ? x : 0;
        return v;
    };
    const std::vector<double> x{0.5, -1.5};
    const auto expected = affine(*m.head, relu(affine(m.blocks[0], relu(affine(*m.stem, x)))));
    const auto got = forward(m, theta, x).output;
    REQUIRE(got.size() == expected.size());
    CHECK(got[0] == doctest::Approx(expected[0]).epsilon(1e-14));
}

TEST_CASE("vjp of a one-input linear model recovers basis patterns") {
    const ParamModel m = linear_model(1, 3);
    std::vector<double> theta(m.theta_count, 0.0);
    const std::vector<double> x{1.0};
    const auto fwd = forward(m, theta, x);

    const std::vector<double> e1{1, 0, 0};
    const auto g = vjp_params(fwd.tape, e1);
    // d f_0 / d w_00 = x_0 = 1 and d f_0 / d b_0 = 1, everything else zero
    CHECK(g[m.head->w_offset + 0] == 1.0);
    CHECK(g[m.head->b_offset + 0] == 1.0);
    double sum = 0;
    for (double v : g) sum += std::abs(v);
    CHECK(sum == 2.0);

    const std::vector<double> zero{0, 0, 0};
    const auto gz = vjp_params(fwd.tape, zero);
    for (double v : gz) CHECK(v == 0.0);
}

TEST_CASE("vjp weight block equals the outer product u x^T") {
    Rng rng(3);
    const ParamModel m = linear_model(4, 3);
    const auto theta = testmodels::random_theta(m, rng);
    const auto x = testmodels::random_input(m, rng);
    std::vector<double> u{0.3, -1.2, 2.0};
    const auto fwd = forward(m, theta, x);
    const auto g = vjp_params(fwd.tape, u);
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(g[m.head->w_offset + r * 4 + c] == doctest::Approx(u[r] * x[c]).epsilon(1e-12));
        }
        CHECK(g[m.head->b_offset + r] == doctest::Approx(u[r]).epsilon(1e-12));
    }
}

TEST_CASE("jacobian of a linear model: column norms and orthogonality") {
    Rng rng(5);
    const ParamModel m = linear_model(4, 3);
    const auto theta = testmodels::random_theta(m, rng);
    const auto x = testmodels::random_input(m, rng);
    const Jacobian j = jacobian_params(m, theta, x);
    double x2 = 0;
    for (double v : x) x2 += v * v;
    for (std::size_t i = 0; i < j.mf; ++i) {
        const auto ci = j.column(i);
        double n2 = 0;
        for (double v : ci) n2 += v * v;
        CHECK(n2 == doctest::Approx(x2 + 1.0).epsilon(1e-12)); // + bias entry
        for (std::size_t k = i + 1; k < j.mf; ++k) {
            const auto ck = j.column(k);
            double dot = 0;
            for (std::size_t t = 0; t < j.theta_count; ++t) dot += ci[t] * ck[t];
            CHECK(dot == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("relu subgradient at zero is zero") {
    ModelConfig c;
    c.input_dim = 2;
    c.output_dim = 2;
    c.block_count = 1;
    c.hidden_width = 3;
    c.activation = Activation::relu;
    const ParamModel m = build(c);
    const std::vector<double> theta(m.theta_count, 0.0); // all weights and biases zero
    const std::vector<double> x{1.0, -2.0};
    const Jacobian j = jacobian_params(m, theta, x);
    // pre-activations are exactly zero, so nothing flows through the blocks;
    // only the head bias entries survive
    for (std::size_t i = 0; i < j.mf; ++i) {
        const auto col = j.column(i);
        for (std::size_t t = 0; t < j.theta_count; ++t) {
            const bool is_own_bias = t == m.head->b_offset + i;
            CHECK(col[t] == (is_own_bias ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("jacobian matches finite differences on random models") {
    Rng rng(7);
    for (int models = 0; models < 20; ++models) {
        const ModelConfig c = testmodels::random_config(rng);
        const ParamModel m = build(c);
        const auto theta = testmodels::random_theta(m, rng);
        const auto x = testmodels::random_input(m, rng);
        const Jacobian j = jacobian_params(m, theta, x);
        const auto fd = testmodels::fd_jacobian(m, theta, x);
        REQUIRE(fd.size() == j.data.size());
        for (std::size_t i = 0; i < fd.size(); ++i) {
            const double got = j.data[i];
            const double want = fd[i];
            const bool ok = std::abs(got - want) <= 1e-7 ||
                            std::abs(got - want) <= 1e-4 * std::abs(want);
            CHECK(ok);
        }
    }
}

TEST_CASE("vjp is linear in the cotangent") {
    Rng rng(11);
    const ModelConfig c = testmodels::random_config(rng);
    const ParamModel m = build(c);
    const auto theta = testmodels::random_theta(m, rng);
    const auto x = testmodels::random_input(m, rng);
    const auto fwd = forward(m, theta, x);
    const std::size_t mf = fwd.output.size();
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> u(mf), v(mf), combo(mf);
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        for (std::size_t i = 0; i < mf; ++i) {
            u[i] = rng.normal();
            v[i] = rng.normal();
            combo[i] = a * u[i] + b * v[i];
        }
        const auto gu = vjp_params(fwd.tape, u);
        const auto gv = vjp_params(fwd.tape, v);
        const auto gc = vjp_params(fwd.tape, combo);
        for (std::size_t i = 0; i < gc.size(); ++i) {
            CHECK(std::abs(gc[i] - (a * gu[i] + b * gv[i])) <= 1e-10);
        }
    }
}

TEST_CASE("forward and vjp are bit-deterministic") {
    Rng rng(13);
    const ModelConfig c = testmodels::random_config(rng);
    const ParamModel m = build(c);
    const auto theta = testmodels::random_theta(m, rng);
    const auto x = testmodels::random_input(m, rng);
    std::vector<double> u(m.output_dim());
    for (auto& w : u) w = rng.normal();

    const auto f1 = forward(m, theta, x);
    const auto f2 = forward(m, theta, x);
    CHECK(std::memcmp(f1.output.data(), f2.output.data(), f1.output.size() * 8) == 0);
    const auto g1 = vjp_params(f1.tape, u);
    const auto g2 = vjp_params(f2.tape, u);
    CHECK(std::memcmp(g1.data(), g2.data(), g1.size() * 8) == 0);
}

TEST_CASE("errors: dimension mismatches, non-finite values, memory budget") {
    const ParamModel m = linear_model(2, 2);
    std::vector<double> theta(m.theta_count, 0.0);
    const std::vector<double> bad_x{1.0};
    CHECK_THROWS_AS(forward(m, theta, bad_x), domain_error);
    const std::vector<double> bad_theta(m.theta_count + 1, 0.0);
    const std::vector<double> x{1, 2};
    CHECK_THROWS_AS(forward(m, bad_theta, x), domain_error);

    theta[m.head->w_offset] = 1e308;
    theta[m.head->w_offset + 1] = 1e308;
    const std::vector<double> big{1e10, 1e10};
    CHECK_THROWS_WITH_AS(forward(m, theta, big), doctest::Contains("head"), numeric_error);

    std::fill(theta.begin(), theta.end(), 0.0);
    const auto fwd = forward(m, theta, x);
    const std::vector<double> bad_cot{1, 2, 3};
    CHECK_THROWS_AS(vjp_params(fwd.tape, bad_cot), domain_error);

    CHECK_THROWS_AS(jacobian_params(m, theta, x, /*budget_bytes=*/8), domain_error);
}

TEST_CASE("softmax and concat primitives differentiate correctly") {
    // hand-built graph: f = softmax(W1 x) concatenated with (W2 x + x2-part)
    const std::size_t in = 3;
    std::vector<double> theta;
    const AffineSpec a1{0, 3 * in, in, 3};
    const AffineSpec a2{3 * in + 3, 3 * in + 3 + 2 * in, in, 2};
    theta.resize(a2.b_offset + 2);
    Rng rng(23);
    for (auto& v : theta) v = 0.5 * rng.normal();
    const std::vector<double> x{0.4, -0.8, 1.2};

    auto build_graph = [&](std::span<const double> th) {
        TapeBuilder b(th);
        const int xin = b.input(x);
        const int z1 = b.affine(xin, a1, "branch 1");
        const int p = b.softmax(z1, "branch 1 softmax");
        const int z2 = b.affine(xin, a2, "branch 2");
        return b.finish(b.concat(p, z2, "merge"));
    };

    const Tape tape = build_graph(theta);
    REQUIRE(tape.output_dim() == 5);

    // finite-difference jacobian of the same graph
    std::vector<double> tp(theta);
    for (std::size_t o = 0; o < 5; ++o) {
        std::vector<double> cot(5, 0.0);
        cot[o] = 1.0;
        const auto g = vjp_params(tape, cot);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double h = 1e-6;
            const double t0 = tp[i];
            tp[i] = t0 + h;
            const Tape tape_up = build_graph(tp);
            const double fu = tape_up.output()[o];
            tp[i] = t0 - h;
            const Tape tape_dn = build_graph(tp);
            const double fd = tape_dn.output()[o];
            tp[i] = t0;
            CHECK(g[i] == doctest::Approx((fu - fd) / (2 * h)).epsilon(1e-4));
        }
    }

    // softmax outputs stay on the simplex
    double sum = 0;
    for (std::size_t i = 0; i < 3; ++i) sum += tape.output()[i];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dropout evaluator") {
    ModelConfig c;
    c.input_dim = 3;
    c.output_dim = 2;
    c.block_count = 1;
    c.hidden_width = 8;
    c.activation = Activation::relu;
    const ParamModel m = build(c);

    Rng rng(17);
    // positive weights and inputs keep every relu in its linear region, so
    // the inverted-dropout mean matches the plain forward exactly
    std::vector<double> theta(m.theta_count);
    for (auto& v : theta) v = rng.uniform(0.05, 0.4);
    const std::vector<double> x{0.7, 0.2, 1.1};

    SUBCASE("rate zero is the plain forward") {
        DropoutEvaluator ev = apply_dropout(m, 0.0, 99);
        CHECK(ev.forward(theta, x).output == forward(m, theta, x).output);
    }

    SUBCASE("fixed seed gives a deterministic mask sequence") {
        DropoutEvaluator a = apply_dropout(m, 0.5, 42);
        DropoutEvaluator b = apply_dropout(m, 0.5, 42);
        for (int i = 0; i < 5; ++i) {
            CHECK(a.forward(theta, x).output == b.forward(theta, x).output);
        }
    }

    SUBCASE("mask mean approximates the undropped output") {
        DropoutEvaluator ev = apply_dropout(m, 0.3, 7);
        const auto plain = forward(m, theta, x).output;
        std::vector<double> mean(plain.size(), 0.0);
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const auto out = ev.forward(theta, x).output;
            for (std::size_t j = 0; j < out.size(); ++j) mean[j] += out[j];
        }
        for (std::size_t j = 0; j < mean.size(); ++j) {
            mean[j] /= n;
            CHECK(mean[j] == doctest::Approx(plain[j]).epsilon(0.03));
        }
    }

    SUBCASE("invalid rate") {
        CHECK_THROWS_AS(apply_dropout(m, 1.0, 1), domain_error);
    }
}
