#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "oracles.hpp"
#include "slp/rng.hpp"
#include "slp/spread.hpp"

using namespace slp;

namespace {

SpreadContext beta_uniform_ctx(std::int64_t n, std::int64_t n_T, double beta,
                               double a) {
    return SpreadContext(n, n_T, beta, BetaDensity{a, 1.0}, uniform_density());
}

SpreadContext uniform_ctx(std::int64_t n, std::int64_t n_T, double beta) {
    return SpreadContext(n, n_T, beta, uniform_density(), uniform_density());
}

}  // namespace

TEST_CASE("solve_spread closed forms") {
    // both uniform, interior window: t^(2b) (n + n_T) 2t = 1
    const auto ctx = uniform_ctx(600, 400, 0.5);
    const double expected = std::pow(2.0 * 1000.0, -1.0 / 2.0);
    CHECK(solve_spread(ctx, 0.5) == doctest::Approx(expected).epsilon(1e-10));

    // Beta(4, 1) source only at x = 0: window mass is t^a, so t = n^(-1/(2b+a))
    const auto edge = beta_uniform_ctx(10000, 0, 0.5, 4.0);
    CHECK(solve_spread(edge, 0.0) ==
          doctest::Approx(std::pow(10000.0, -0.2)).epsilon(1e-10));
}

TEST_CASE("solve_spread residual contract on random contexts") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const double beta = 0.3 + 2.0 * rng.uniform();
        const double a = 0.5 + 6.0 * rng.uniform();
        const auto n = static_cast<std::int64_t>(1 + rng.uniform() * 1e6);
        const auto n_T = static_cast<std::int64_t>(rng.uniform() * 1e5);
        const auto ctx = beta_uniform_ctx(n, n_T, beta, a);
        const double x = rng.uniform();
        const double t = solve_spread(ctx, x);
        const double residual = std::fabs(ctx.window_balance(x, t) - 1.0);
        CHECK(residual <= 1e-12 * static_cast<double>(n + n_T));
        // monotone window identity around the root
        if (t < 0.5) {
            CHECK(ctx.window_balance(x, 0.5 * t) < 1.0);
            CHECK(ctx.window_balance(x, 2.0 * t) > 1.0);
        }
    }
}

TEST_CASE("solve_spread is bracketing-order independent (uniqueness)") {
    Rng rng(47);
    for (int trial = 0; trial < 100; ++trial) {
        const double beta = 0.4 + 1.2 * rng.uniform();
        const auto n = static_cast<std::int64_t>(10 + rng.uniform() * 1e5);
        const auto ctx = beta_uniform_ctx(n, n / 7, beta, 4.0);
        const double x = rng.uniform();
        const double t1 = solve_spread(ctx, x, 1e-12);
        const double t2 = solve_spread(ctx, x, 1e-10);
        CHECK(std::fabs(t1 - t2) <= 1e-10);
    }
}

TEST_CASE("crossing points: ordering, symmetry, fixed point") {
    const auto ctx = uniform_ctx(6000, 4000, 0.5);
    const auto [x1, x2] = crossing_points(ctx);
    CHECK(x1 > 0.0);
    CHECK(x1 < 0.5);
    CHECK(x2 > 0.5);
    CHECK(x2 < 1.0);
    // fixed-point property
    CHECK(solve_spread(ctx, x1) == doctest::Approx(x1).epsilon(1e-9));
    CHECK(solve_spread(ctx, x2) == doctest::Approx(1.0 - x2).epsilon(1e-9));
    // reflection symmetry of the uniform pair
    CHECK(std::fabs(x2 - (1.0 - x1)) <= 1e-10);
    // closed form: x^(2b) (n + n_T) 2x = 1 at the left crossing
    CHECK(x1 == doctest::Approx(std::pow(2.0 * 10000.0, -0.5)).epsilon(1e-9));
}

TEST_CASE("crossing points ordering holds over random contexts") {
    Rng rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        const double beta = 0.3 + 1.5 * rng.uniform();
        const double a = 1.0 + 5.0 * rng.uniform();
        const auto n = static_cast<std::int64_t>(100 + rng.uniform() * 1e5);
        const auto n_T = static_cast<std::int64_t>(rng.uniform() * 1e4);
        const auto ctx = beta_uniform_ctx(n, n_T, beta, a);
        const auto [x1, x2] = crossing_points(ctx);
        CHECK(x1 > 0.0);
        CHECK(x1 < 0.5);
        CHECK(x2 > 0.5);
        CHECK(x2 < 1.0);
    }
}

TEST_CASE("crossing points precondition") {
    CHECK_THROWS_AS(crossing_points(uniform_ctx(1, 0, 2.0)),
                    std::invalid_argument);
}

TEST_CASE("spread derivative: flat pooled density gives zero") {
    const auto ctx = uniform_ctx(700, 300, 0.5);
    const double d = spread_derivative(ctx, 0.5);
    CHECK(std::fabs(d) <= 1e-12);
}

TEST_CASE("spread derivative matches finite differences") {
    Rng rng(61);
    const auto ctx = beta_uniform_ctx(20000, 500, 0.5, 4.0);
    const auto [x1, x2] = crossing_points(ctx);
    int checked = 0;
    for (int trial = 0; trial < 300 && checked < 100; ++trial) {
        const double x = rng.uniform();
        if (x < 1e-3 || x > 1.0 - 1e-3) continue;
        if (std::fabs(x - x1) < 5e-3 || std::fabs(x - x2) < 5e-3) continue;
        const double fd = oracle::central_diff(
            [&](double u) { return solve_spread(ctx, u); }, x, 1e-6);
        CHECK(std::fabs((spread_derivative(ctx, x)) - (fd)) <= 1e-4);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("spread derivative stays within [-1, 1]") {
    Rng rng(67);
    const auto ctx = beta_uniform_ctx(50000, 2000, 0.7, 4.0);
    const auto [x1, x2] = crossing_points(ctx);
    int checked = 0;
    for (int trial = 0; trial < 3000 && checked < 1000; ++trial) {
        const double x = 1e-3 + (1.0 - 2e-3) * rng.uniform();
        if (std::fabs(x - x1) < 1e-4 || std::fabs(x - x2) < 1e-4) continue;
        const double d = spread_derivative(ctx, x);
        CHECK(d <= 1.0);
        CHECK(d >= -1.0);
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("spread derivative refuses points at the crossings") {
    const auto ctx = uniform_ctx(6000, 4000, 0.5);
    const auto [x1, x2] = crossing_points(ctx);
    CHECK_THROWS_AS(spread_derivative(ctx, x1), std::domain_error);
    CHECK_THROWS_AS(spread_derivative(ctx, x2), std::domain_error);
}

TEST_CASE("spread function is 1-Lipschitz") {
    Rng rng(71);
    const auto ctx = beta_uniform_ctx(30000, 1000, 0.5, 4.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double x = rng.uniform();
        const double y = rng.uniform();
        const double tx = solve_spread(ctx, x);
        const double ty = solve_spread(ctx, y);
        CHECK(std::fabs(tx - ty) <= std::fabs(x - y) + 2e-12);
    }
}

TEST_CASE("spread function shape: decreasing then increasing for Beta source") {
    const auto ctx = beta_uniform_ctx(100000, 100, 0.5, 4.0);
    const double b_n = spread_b_n(100000.0, 100.0, 0.5);
    double prev = solve_spread(ctx, 0.0);
    // strictly decreasing left of b_n (checked up to a safety margin), then
    // increasing toward 1
    for (int i = 1; i <= 200; ++i) {
        const double x = (b_n - 0.01) * i / 200.0;
        const double cur = solve_spread(ctx, x);
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK(solve_spread(ctx, 1.0) > solve_spread(ctx, b_n));
}

TEST_CASE("spread_order closed-form values") {
    // boundary value at x = 0 with no target data
    CHECK(spread_order(0.0, 1e4, 0.0, 4.0, 0.5) ==
          doctest::Approx(std::pow(10.0, -0.8)).epsilon(1e-12));
    // x = 1 is (n + n_T)^(-1/(2b+1))
    CHECK(spread_order(1.0, 1e4, 1e3, 4.0, 0.5) ==
          doctest::Approx(std::pow(1.1e4, -0.5)).epsilon(1e-12));
    CHECK(spread_order(1.0, 5e5, 2e4, 3.0, 0.9) ==
          doctest::Approx(std::pow(5.2e5, -1.0 / 2.8)).epsilon(1e-12));
}

TEST_CASE("spread_order tracks the exact solver within a constant") {
    Rng rng(83);
    for (int trial = 0; trial < 60; ++trial) {
        const double beta = 0.4 + 1.1 * rng.uniform();
        const double a = 2.0 + 4.0 * rng.uniform();
        const auto n = static_cast<std::int64_t>(
            std::pow(10.0, 2.0 + 4.0 * rng.uniform()));
        const auto n_T =
            static_cast<std::int64_t>(rng.uniform() * static_cast<double>(n));
        const auto ctx = beta_uniform_ctx(n, n_T, beta, a);
        const double x = rng.uniform();
        const double exact = solve_spread(ctx, x);
        const double order = spread_order(x, static_cast<double>(n),
                                          static_cast<double>(n_T), a, beta);
        const double ratio = exact / order;
        CHECK(ratio >= 1.0 / 20.0);
        CHECK(ratio <= 20.0);
    }
}
