#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "normbound/errors.hpp"
#include "normbound/gicstat.hpp"
#include "support/testmodels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

using namespace normbound;

TEST_CASE("ball sampling") {
    SUBCASE("norms never exceed the radius and reseeding reproduces points") {
        const auto a = sample_ball(16, 500, 2.5, 99);
        const auto b = sample_ball(16, 500, 2.5, 99);
        CHECK(a == b);
        for (std::size_t i = 0; i < 500; ++i) {
            double n2 = 0;
            for (std::size_t j = 0; j < 16; ++j) n2 += a[i * 16 + j] * a[i * 16 + j];
            CHECK(std::sqrt(n2) <= 2.5 + 1e-12);
        }
        CHECK(sample_ball(16, 500, 2.5, 100) != a);
    }

    SUBCASE("mean norm and radial distribution at high dimension") {
        const std::size_t m = 1000, n = 100000;
        const double eps = 1.5;
        const auto pts = sample_ball(m, n, eps, 7);
        std::vector<double> u(n); // (norm/eps)^m should be uniform(0, 1)
        double mean_norm = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double n2 = 0;
            for (std::size_t j = 0; j < m; ++j) n2 += pts[i * m + j] * pts[i * m + j];
            const double norm = std::sqrt(n2);
            mean_norm += norm;
            u[i] = std::pow(norm / eps, static_cast<double>(m));
        }
        mean_norm /= static_cast<double>(n);
        const double expected = eps * static_cast<double>(m) / static_cast<double>(m + 1);
        CHECK(mean_norm == doctest::Approx(expected).epsilon(0.005));

        std::sort(u.begin(), u.end());
        double ks = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double f = static_cast<double>(i + 1) / static_cast<double>(n);
            ks = std::max(ks, std::abs(f - u[i]));
            ks = std::max(ks, std::abs(u[i] - static_cast<double>(i) / static_cast<double>(n)));
        }
        CHECK(ks < 0.02);
    }

    SUBCASE("bad arguments") {
        CHECK_THROWS_AS(sample_ball(0, 1, 1.0, 0), domain_error);
        CHECK_THROWS_AS(sample_ball(1, 1, 0.0, 0), domain_error);
    }
}

TEST_CASE("concentration check") {
    SUBCASE("orthonormal columns pass") {
        const std::size_t m = 64, n = 8;
        std::vector<double> pts(n * m, 0.0);
        for (std::size_t i = 0; i < n; ++i) pts[i * m + i] = 1.0;
        const auto rep = concentration_check(pts, n, m);
        CHECK(rep.fraction_norm_ok == 1.0);
        CHECK(rep.fraction_inner_ok == 1.0);
        CHECK(rep.max_abs_inner == 0.0);
        CHECK(rep.passes);
    }

    SUBCASE("identical unit vectors fail the inner-product bound") {
        const std::size_t m = 4096, n = 2;
        std::vector<double> pts(n * m, 0.0);
        pts[0] = 1.0;
        pts[m] = 1.0;
        const auto rep = concentration_check(pts, n, m);
        CHECK(rep.fraction_inner_ok == 0.0);
        CHECK(rep.max_abs_inner == 1.0);
        // the 1 - c/n pass threshold is vacuous at n = 2; a tighter margin
        // turns the failed inner check into an overall failure
        CHECK(!concentration_check(pts, n, m, /*pass_margin=*/0.5).passes);
    }

    SUBCASE("high-dimensional ball samples concentrate") {
        const std::size_t m = 1000, n = 100;
        int good = 0;
        for (int seed = 0; seed < 5; ++seed) {
            const auto pts = sample_ball(m, n, 1.0, 1000 + seed);
            const auto rep = concentration_check(pts, n, m);
            if (rep.fraction_norm_ok >= 0.95 && rep.fraction_inner_ok >= 0.95) ++good;
        }
        CHECK(good == 5);
    }

    SUBCASE("dimension one is rejected") {
        const std::vector<double> pts{0.5, -0.5};
        CHECK_THROWS_AS(concentration_check(pts, 2, 1), domain_error);
    }
}

TEST_CASE("gic check on model jacobians") {
    SUBCASE("linear model columns are orthogonal with equal norms") {
        ModelConfig c;
        c.input_dim = 6;
        c.output_dim = 4;
        const ParamModel m = build(c);
        Rng rng(5);
        const auto theta = testmodels::random_theta(m, rng);
        const auto x = testmodels::random_input(m, rng);
        const auto rep = gic_check(jacobian_params(m, theta, x));
        CHECK(rep.n_columns == 4);
        CHECK(rep.dim == m.theta_count);
        CHECK(rep.max_abs_inner <= 1e-12);
        CHECK(rep.passes);
    }

    SUBCASE("zero jacobian fails") {
        Jacobian j;
        j.theta_count = 10;
        j.mf = 3;
        j.data.assign(30, 0.0);
        const auto rep = gic_check(j);
        CHECK(rep.min_norm == 0.0);
        CHECK(!rep.passes);
    }
}

TEST_CASE("z factor") {
    // independent high-precision recomputation
    const long double mf = 100.0L, th = 10001.0L;
    const long double shrink = 1.0L - 2.0L * std::log(mf) / th;
    const long double zref =
        2.0L * mf * std::sqrt(6.0L * std::log(mf)) / std::sqrt(th - 1.0L) * shrink * shrink;
    CHECK(z_factor(10001, 100) == doctest::Approx(static_cast<double>(zref)).epsilon(1e-12));
    CHECK(z_factor(10001, 100) == doctest::Approx(10.50).epsilon(1e-3));

    SUBCASE("decreasing in the parameter count") {
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t t : {1000, 10000, 100000, 1000000}) {
            const double z = z_factor(t, 100);
            CHECK(z < prev);
            prev = z;
        }
    }

    SUBCASE("increasing in the output dimension") {
        double prev = 0;
        for (std::size_t mfi : {2, 10, 50, 100, 500}) {
            const double z = z_factor(1000000, mfi);
            CHECK(z > prev);
            prev = z;
        }
    }

    SUBCASE("preconditions") {
        CHECK_THROWS_AS(z_factor(10, 1), domain_error);
        CHECK_THROWS_AS(z_factor(100, 100), domain_error);
    }
}

TEST_CASE("predicted structural bounds") {
    const auto b = predicted_structural_bounds(10001, 100, 1.0);
    // independent recomputation
    const long double shrink = 1.0L - 2.0L * std::log(100.0L) / 10001.0L;
    CHECK(b.u_max == doctest::Approx(static_cast<double>(-2.0L * std::log(shrink))).epsilon(1e-12));
    CHECK(b.u_max == doctest::Approx(0.00184).epsilon(1e-2));
    CHECK(b.d_max == doctest::Approx(2.442).epsilon(1e-3));

    SUBCASE("u_max vanishes as the parameter count grows") {
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t t : {1000, 10000, 100000, 1000000, 10000000}) {
            const double u = predicted_structural_bounds(t, 100, 1.0).u_max;
            CHECK(u < prev);
            prev = u;
        }
        CHECK(prev < 1e-4);
    }
}

TEST_CASE("sliding pearson") {
    SUBCASE("identical ramps correlate perfectly") {
        std::vector<double> x(60);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i + 1);
        const auto r = sliding_pearson(x, x, 50);
        CHECK(r.values.size() == 11);
        for (double v : r.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
        for (bool z : r.zero_variance) CHECK(!z);
    }

    SUBCASE("negated series correlate at -1") {
        std::vector<double> x(60), y(60);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = std::sin(0.1 * static_cast<double>(i)) + 0.01 * static_cast<double>(i);
            y[i] = -x[i];
        }
        const auto r = sliding_pearson(x, y, 50);
        for (double v : r.values) CHECK(v == doctest::Approx(-1.0).epsilon(1e-12));
    }

    SUBCASE("constant windows report zero with a flag") {
        std::vector<double> x(10, 3.0), y(10);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>(i);
        const auto r = sliding_pearson(x, y, 5);
        for (std::size_t i = 0; i < r.values.size(); ++i) {
            CHECK(r.values[i] == 0.0);
            CHECK(r.zero_variance[i]);
        }
    }

    SUBCASE("invariant under positive affine maps") {
        Rng rng(13);
        std::vector<double> x(80), y(80), ax(80);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = rng.normal();
            y[i] = rng.normal();
            ax[i] = 2.75 * x[i] - 3.0;
        }
        const auto r1 = sliding_pearson(x, y, 20);
        const auto r2 = sliding_pearson(ax, y, 20);
        for (std::size_t i = 0; i < r1.values.size(); ++i) {
            CHECK(std::abs(r1.values[i] - r2.values[i]) <= 1e-12);
        }
    }

    SUBCASE("argument validation") {
        const std::vector<double> x{1, 2, 3}, y{1, 2};
        CHECK_THROWS_AS(sliding_pearson(x, y, 2), domain_error);
        const std::vector<double> z{1, 2, 3};
        CHECK_THROWS_AS(sliding_pearson(x, z, 1), domain_error);
        CHECK_THROWS_AS(sliding_pearson(x, z, 4), domain_error);
    }
}
