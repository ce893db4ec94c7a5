#pragma once

#include <cstdint>
#include <utility>

#include "slp/densities.hpp"

namespace slp {

// Pooled-sample context for the spread-function equation
//   t^(2*beta) * (n * H(x +- t) + n_T * H_T(x +- t)) = 1,
// where H and H_T are the source/target interval masses of the window
// [x - t, x + t] clipped to [0, 1].
struct SpreadContext {
    std::int64_t n = 0;
    std::int64_t n_T = 0;
    double beta = 0.5;
    DensityModel source = uniform_density();
    DensityModel target = uniform_density();

    SpreadContext(std::int64_t n_, std::int64_t n_T_, double beta_,
                  DensityModel source_, DensityModel target_);

    // Window balance g(t) = t^(2*beta) * (n H + n_T H_T); strictly increasing
    // in t with g(0) = 0.
    double window_balance(double x, double t) const;

    // Pooled density mix (n h + n_T h_T) / (n + n_T).
    double pooled_pdf(double x) const;
};

// Unique root of the window-balance equation at x; the returned t satisfies
// |g(t) - 1| <= tol * (n + n_T). Bracketed bisection, 200 iterations max.
double solve_spread(const SpreadContext& ctx, double x, double tol = 1e-12);

// The points x1 < 1/2 < x2 where t_n(x1) = x1 and t_n(x2) = 1 - x2.
// Requires n + n_T >= 2^(2*beta).
std::pair<double, double> crossing_points(const SpreadContext& ctx,
                                          double tol = 1e-12);

// Closed-form derivative of the spread function away from the crossing
// points; always in [-1, 1]. Throws when the window boundary is within
// guard of touching 0 or 1 (the derivative jumps there).
double spread_derivative(const SpreadContext& ctx, double x,
                         double guard = 1e-7);

// Piecewise asymptotic order of t_n for a Beta(a, 1) source and uniform
// target: constant alpha_n on [0, alpha_n], (n x^(a-1) + n_T)^(-1/(2b+1)) in
// the middle, constant 1 - b_n on [b_n, 1]. This is also the explicit
// bandwidth formula used by the simulation harness.
double spread_order(double x, double n, double n_T, double a, double beta);

// The two region boundaries of spread_order.
double spread_alpha_n(double n, double n_T, double a, double beta);
double spread_b_n(double n, double n_T, double beta);

}  // namespace slp
