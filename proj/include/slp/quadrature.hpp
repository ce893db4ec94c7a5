#pragma once

#include <cmath>
#include <functional>

namespace slp {

// Adaptive Simpson integration on [a, b] with absolute tolerance tol.
// Backend for all density mass and normalizer checks.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-10);

}  // namespace slp
