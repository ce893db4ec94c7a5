#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "slp/estimators.hpp"

namespace slp {

struct BetaMleResult {
    double a1 = 1.0;
    double a2 = 1.0;
};

// Maximum-likelihood Beta shape estimates over the compact box
// [a_lo, a_hi]^2. Points at exactly 0 or 1 are discarded; at least two
// interior points are required. With fix_a2 the second shape is pinned to 1
// and the first has the closed form -m / sum(log x), clamped to the box.
BetaMleResult beta_mle(std::span<const double> xs, double a_lo, double a_hi,
                       bool fix_a2 = false);

// Beta log-likelihood (used by the optimizer and by audit tests).
double beta_log_likelihood(std::span<const double> xs, double a1, double a2);

struct LepskiConfig {
    double beta_lo = 0.5;       // smoothness window lower end
    double beta_hi = 2.0;       // smoothness window upper end
    double trim = 0.05;         // data restricted to [trim, 1 - trim]
    double kappa = 0.2;
    double c_sel = 0.0;         // selection constant, > 4 * kappa
    double c_shrink = 0.0;      // shrink constant, > (2 beta_hi + 1)^2 / (2 beta_lo)
    int eval_grid_size = 4096;  // sup-norm evaluation grid

    static LepskiConfig with_defaults(double beta_lo, double beta_hi,
                                      double kappa);
    void validate() const;
};

// Dyadic resolution range: tau_star = max{tau + 1 : 2^tau <= m^(1/(2 beta_lo + 1))}
// and tau_low = max{tau : 2^tau <= m^(1/(2 beta_hi + 1))}.
std::pair<int, int> lepski_tau_range(std::int64_t m, const LepskiConfig& cfg);

struct LepskiResult {
    double beta_hat = 0.0;
    int tau_hat = 0;
    int tau_star = 0;
    int tau_low = 0;
};

// Lepski-type smoothness selection on one data half: bin means at dyadic
// resolutions over [trim, 1 - trim], sup-norm comparisons against the
// c_sel * mu^beta_tau * log(m) envelope, then the shrink-corrected beta-hat
// clamped to [beta_lo, beta_hi]. Throws naming the level and bin index if a
// bin is empty.
LepskiResult lepski_beta(const Sample& half, const LepskiConfig& cfg);

// Deterministic floor split: the first floor(n/2) source rows and
// floor(n_T/2) target rows form the first half, the remainder the second.
std::pair<Sample, Sample> split_halves(const Sample& s);

// The half that feeds the smoothness selection: the source rows of the first
// half when n > n_T, the target rows otherwise.
Sample pick_lepski_half(const Sample& s);

struct PluginFit {
    BetaMleResult source_shapes;
    BetaMleResult target_shapes;
    std::vector<double> fitted;
};

// Split-half plug-in pipeline: shape MLE per population on the first halves,
// then the curve fit on the second halves with the estimated densities
// driving the bandwidth. Uses the plugin gate rule for the local polynomial
// path.
PluginFit plugin_fit_curve(std::span<const double> grid, const Sample& s,
                           double a_lo, double a_hi, EstimatorConfig cfg);

}  // namespace slp
