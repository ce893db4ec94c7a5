#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "slp/spread.hpp"

namespace slp {

enum class Origin { source, target };

struct Observation {
    double x = 0.0;
    double y = 0.0;
    Origin origin = Origin::source;
};

// Pooled labeled sample: source rows drawn under h, target rows under h_T.
struct Sample {
    std::vector<Observation> rows;

    std::size_t n = 0;    // source count
    std::size_t n_T = 0;  // target count

    Sample() = default;
    explicit Sample(std::vector<Observation> rows_);

    void push_back(const Observation& obs);
    std::size_t size() const { return rows.size(); }
};

enum class GateRule {
    pooled_mass,  // lambda_min >= (n + n_T) * mass / 8 (known densities)
    plugin        // lambda_min >= (n + n_T) * mass / (16 * T0)
};

struct EstimatorConfig {
    double beta = 0.5;
    double kappa = 0.2;
    double c_bandwidth = 0.7;
    int order_l = 0;     // 0 forces the window-average path
    double T0 = 0.0;     // eigenvalue gate constant (plugin rule)
    double T1 = 0.0;     // truncation level; outputs with |f| >= T1 become 0
    GateRule gate = GateRule::pooled_mass;

    // Defaults for the common desk setup: order_l = floor(beta) when beta > 1,
    // T1 = kappa + 4 * sigma_bar, T0 = 2 * T1.
    static EstimatorConfig with_defaults(double beta, double kappa,
                                         double sigma_bar = 0.3);
};

enum class FitMode { pooled, source_only, target_only };

// Window-average estimator: mean of Y over |X_i - x| <= bandwidth, zero when
// the window is empty. The window is closed at both ends.
double nw_estimate(double x, const Sample& s, double bandwidth);

// Order-l local polynomial estimator with eigenvalue gating and truncation.
// gate_mass is the pooled window mass (n H + n_T H_T)/(n + n_T) (or its
// plug-in estimate); a gated-out or empty window yields 0.
double local_poly_estimate(double x, const Sample& s, double t,
                           const EstimatorConfig& cfg, double gate_mass);

// Fits the curve on a grid: per point, solves the spread equation under the
// mode's effective sample sizes (source_only zeroes n_T, target_only zeroes
// n), scales by c_bandwidth and dispatches to the window average (beta <= 1
// or order_l = 0) or the local polynomial.
std::vector<double> fit_curve(std::span<const double> grid, const Sample& s,
                              const SpreadContext& ctx,
                              const EstimatorConfig& cfg, FitMode mode);

// Smallest eigenvalue of a symmetric matrix (row-major, dim <= 8) by cyclic
// Jacobi rotations. Throws if the input is asymmetric beyond 1e-12.
double min_eigen_sym(std::span<const double> m, int dim);

}  // namespace slp
