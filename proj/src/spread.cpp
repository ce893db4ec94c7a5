#include "slp/spread.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace slp {

SpreadContext::SpreadContext(std::int64_t n_, std::int64_t n_T_, double beta_,
                             DensityModel source_, DensityModel target_)
    : n(n_), n_T(n_T_), beta(beta_), source(std::move(source_)),
      target(std::move(target_)) {
    if (n < 0 || n_T < 0 || n + n_T < 1)
        throw std::invalid_argument("SpreadContext: need n + n_T >= 1");
    if (!(beta > 0.0))
        throw std::invalid_argument("SpreadContext: beta must be positive");
}

double SpreadContext::window_balance(double x, double t) const {
    const double mass_src = n > 0 ? interval_mass(source, x - t, x + t) : 0.0;
    const double mass_tgt = n_T > 0 ? interval_mass(target, x - t, x + t) : 0.0;
    return std::pow(t, 2.0 * beta) *
           (static_cast<double>(n) * mass_src + static_cast<double>(n_T) * mass_tgt);
}

double SpreadContext::pooled_pdf(double x) const {
    const double total = static_cast<double>(n + n_T);
    double value = 0.0;
    if (n > 0) value += static_cast<double>(n) * pdf(source, x);
    if (n_T > 0) value += static_cast<double>(n_T) * pdf(target, x);
    return value / total;
}

double solve_spread(const SpreadContext& ctx, double x, double tol) {
    if (std::isnan(x) || x < 0.0 || x > 1.0)
        throw std::domain_error("solve_spread: x outside [0, 1]");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_spread: tol must be positive");

    const double total = static_cast<double>(ctx.n + ctx.n_T);

    // g(lo) <= 1/2 since H, H_T <= 1; g(1) = n + n_T >= 1.
    double lo = std::pow(2.0 * total, -1.0 / (2.0 * ctx.beta));
    double hi = 1.0;
    double g_lo = ctx.window_balance(x, lo) - 1.0;
    if (g_lo > 0.0) {
        // Guard for pathological specs (mass concentrated enough to push the
        // root below the analytic bracket); expand downward.
        for (int i = 0; i < 64 && g_lo > 0.0; ++i) {
            hi = lo;
            lo *= 0.5;
            g_lo = ctx.window_balance(x, lo) - 1.0;
        }
        if (g_lo > 0.0)
            throw std::runtime_error("solve_spread: could not bracket the root");
    }

    double mid = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;  // bracket at machine resolution
        const double g = ctx.window_balance(x, mid) - 1.0;
        if (g == 0.0) break;
        (g < 0.0 ? lo : hi) = mid;
    }

    const double residual = std::fabs(ctx.window_balance(x, mid) - 1.0);
    if (residual > tol * total)
        throw std::runtime_error("solve_spread: residual above tolerance");
    return mid;
}

namespace {

// Bisect a continuous function with phi(lo) and phi(hi) of opposite sign.
double bisect(const std::function<double(double)>& phi, double lo, double hi) {
    double f_lo = phi(lo);
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) return mid;
        const double f_mid = phi(mid);
        if (f_mid == 0.0) return mid;
        if ((f_lo < 0.0) == (f_mid < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::pair<double, double> crossing_points(const SpreadContext& ctx, double tol) {
    const double total = static_cast<double>(ctx.n + ctx.n_T);
    if (total < std::pow(2.0, 2.0 * ctx.beta))
        throw std::invalid_argument("crossing_points: need n + n_T >= 2^(2 beta)");

    // t_n(x) - x is positive at 0 and negative at 1/2; t_n(x) - (1 - x)
    // changes sign once on [1/2, 1].
    const double x1 = bisect(
        [&](double x) { return solve_spread(ctx, x, tol) - x; }, 0.0, 0.5);
    const double x2 = bisect(
        [&](double x) { return solve_spread(ctx, x, tol) - (1.0 - x); }, 0.5, 1.0);
    return {x1, x2};
}

double spread_derivative(const SpreadContext& ctx, double x, double guard) {
    if (x <= 0.0 || x >= 1.0)
        throw std::domain_error("spread_derivative: x must be interior");
    const double t = solve_spread(ctx, x);
    if (std::fabs(t - x) <= guard || std::fabs(t - (1.0 - x)) <= guard)
        throw std::domain_error(
            "spread_derivative: x too close to a crossing point");

    const double total = static_cast<double>(ctx.n + ctx.n_T);
    const bool left_inside = t < x;
    const bool right_inside = t < 1.0 - x;
    const double h_left = left_inside ? ctx.pooled_pdf(x - t) : 0.0;
    const double h_right = right_inside ? ctx.pooled_pdf(x + t) : 0.0;

    const double numerator = h_left - h_right;
    const double denominator =
        2.0 * ctx.beta / (total * std::pow(t, 2.0 * ctx.beta + 1.0)) + h_right +
        h_left;
    return numerator / denominator;
}

double spread_alpha_n(double n, double n_T, double a, double beta) {
    const double inner = std::pow(n, (2.0 * beta + 1.0) / (2.0 * beta + a)) + n_T;
    return std::pow(inner, -1.0 / (2.0 * beta + 1.0));
}

double spread_b_n(double n, double n_T, double beta) {
    return 1.0 - std::pow(n + n_T, -1.0 / (2.0 * beta + 1.0));
}

double spread_order(double x, double n, double n_T, double a, double beta) {
    const double alpha = spread_alpha_n(n, n_T, a, beta);
    const double b = spread_b_n(n, n_T, beta);
    if (x <= alpha) return alpha;
    if (x >= b) return 1.0 - b;
    return std::pow(n * std::pow(x, a - 1.0) + n_T, -1.0 / (2.0 * beta + 1.0));
}

}  // namespace slp
