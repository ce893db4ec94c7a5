#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "slp/rng.hpp"

namespace slp {

// Two-parameter Beta density on [0, 1]:
//   x^(a1-1) (1-x)^(a2-1) / B(a1, a2).
struct BetaDensity {
    double a1 = 1.0;
    double a2 = 1.0;

    BetaDensity() = default;
    BetaDensity(double a1_, double a2_);
};

inline BetaDensity uniform_density() { return BetaDensity{1.0, 1.0}; }

// One polynomial factor piece of a multi-singularity density:
//   scale * (x - lo)^(left_exp - 1) * (hi - x)^(right_exp - 1) on [lo, hi].
struct DensityPiece {
    double lo = 0.0;
    double hi = 1.0;
    double scale = 1.0;
    double left_exp = 1.0;
    double right_exp = 1.0;
};

// A potential singularity point with its per-side polynomial orders.
// A missing side (domain endpoint) carries no order parameter.
struct SingularPoint {
    double s = 0.0;
    std::optional<double> left_order;
    std::optional<double> right_order;
};

enum class PopulationRole { source, target };

// Piecewise polynomial-singularity density specification. The density may
// vanish polynomially at each declared point; away from the delta
// neighborhoods of those points it stays inside [c_lower, c_upper].
struct SingularityDensitySpec {
    std::vector<DensityPiece> pieces;
    std::vector<SingularPoint> points;
    double delta = 0.05;
    double c_lower = 1e-3;
    double c_upper = 1e3;
    PopulationRole role = PopulationRole::source;
};

using DensityModel = std::variant<BetaDensity, SingularityDensitySpec>;

// Beta pdf/cdf. Throw std::domain_error for x outside [0, 1].
double beta_pdf(double x, const BetaDensity& d);
double beta_cdf(double x, const BetaDensity& d);

double singular_pdf(double x, const SingularityDensitySpec& d);
double singular_cdf(double x, const SingularityDensitySpec& d);

double pdf(const DensityModel& d, double x);
double cdf(const DensityModel& d, double x);

// Mass of [lo, hi] clipped to [0, 1]; zero when the clipped interval is empty.
double interval_mass(const DensityModel& d, double lo, double hi);

// i.i.d. draws. Beta(a, 1) short-circuits to U^(1/a); general Beta uses the
// gamma-variate ratio; singularity specs invert a tabulated CDF (2^14 knots,
// piecewise monotone cubic).
std::vector<double> sample(const DensityModel& d, std::size_t count, Rng& rng);

struct ValidationIssue {
    std::string condition;
    std::string detail;
};

struct ValidationReport {
    bool pass = true;
    std::vector<ValidationIssue> failures;
    // Name of the first violated condition; empty when pass.
    std::string first_violation() const {
        return failures.empty() ? std::string{} : failures.front().condition;
    }
};

// Checks the structural invariants of a singularity spec: ordering and
// disjointness of the delta neighborhoods, per-side orders >= 1 (max > 1 for
// a source density), envelope bounds on a 10^3-point grid outside the
// neighborhoods, and unit mass by quadrature (tolerance 1e-6).
ValidationReport validate_spec(const SingularityDensitySpec& d);

// Numeric unit-mass check for any density model (adaptive Simpson backend).
double total_mass(const DensityModel& d);

}  // namespace slp
