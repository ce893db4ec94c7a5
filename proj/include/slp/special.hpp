#pragma once

// Scalar special functions used by the density and adaptation code:
// log-beta, regularized incomplete beta, digamma, trigamma.

namespace slp {

// ln B(a, b) for a, b > 0.
double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b) for x in [0, 1], a, b > 0.
// Continued-fraction evaluation with the symmetry switch at
// x > (a + 1)/(a + b + 2).
double reg_inc_beta(double x, double a, double b);

// Digamma and trigamma for positive arguments. Recurrence-shifted
// asymptotic series (shift until the argument exceeds 6), accurate to
// about 1e-12.
double digamma(double x);
double trigamma(double x);

}  // namespace slp
