#pragma once

// Test-side oracles, kept independent of the library's numeric paths: a
// Romberg integrator (the library uses adaptive Simpson), a trapezoid
// fallback for rough masses, and a naive window-average regression.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

// Romberg integration with Richardson extrapolation.
inline double romberg(const std::function<double(double)>& f, double a,
                      double b, int levels = 20, double tol = 1e-12) {
    std::vector<std::vector<double>> table(levels);
    double h = b - a;
    table[0] = {0.5 * h * (f(a) + f(b))};
    for (int k = 1; k < levels; ++k) {
        h *= 0.5;
        double acc = 0.0;
        const long points = 1L << (k - 1);
        for (long i = 0; i < points; ++i)
            acc += f(a + (2.0 * i + 1.0) * h);
        table[k].resize(k + 1);
        table[k][0] = 0.5 * table[k - 1][0] + h * acc;
        double factor = 1.0;
        for (int j = 1; j <= k; ++j) {
            factor *= 4.0;
            table[k][j] = table[k][j - 1] +
                          (table[k][j - 1] - table[k - 1][j - 1]) / (factor - 1.0);
        }
        if (k > 3 && std::fabs(table[k][k] - table[k - 1][k - 1]) < tol)
            return table[k][k];
    }
    return table[levels - 1][levels - 1];
}

// Centered finite difference.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

namespace detail {
inline double adaptive_quad_step(const std::function<double(double)>& f,
                                 double a, double b, double fa, double fm,
                                 double fb, double whole, double tol,
                                 int depth) {
    const double m = 0.5 * (a + b);
    const double flm = f(0.5 * (a + m));
    const double frm = f(0.5 * (m + b));
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_quad_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_quad_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

// Adaptive quadrature that keeps refining near algebraic branch points,
// where Romberg's extrapolation is unreliable.
inline double adaptive_quad(const std::function<double(double)>& f, double a,
                            double b, double tol = 1e-12) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_quad_step(f, a, b, fa, fm, fb, whole, tol, 52);
}

// Naive closed-window mean of y over |x_i - x| <= bandwidth; 0 when empty.
inline double window_mean(const std::vector<double>& xs,
                          const std::vector<double>& ys, double x,
                          double bandwidth) {
    double sum = 0.0;
    long count = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (std::fabs(xs[i] - x) <= bandwidth) {
            sum += ys[i];
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace oracle
