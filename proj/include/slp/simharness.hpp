#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "slp/rates.hpp"

namespace slp {

enum class TargetFn { f1, f2 };  // 0.2 x^beta and 0.2 |x - 0.5|^beta

enum class NTRule { SSR1, SSR2, SSR3, SSR4 };

// One Monte Carlo experiment: a grid of source sizes, a target-size rule,
// and the three window-average fits (source-only, target-only, pooled) per
// replication.
struct ExperimentConfig {
    double a = 4.0;
    double beta = 0.5;
    std::vector<std::int64_t> n_list = {3000, 5000, 10000, 30000};
    NTRule nt_rule = NTRule::SSR2;
    // Front constants of the four rules: n_T = c1 n^e, c2 n^(e(1+c4_sl)),
    // c3 n^(e(1+c4_tl)), c4 n with e = (2 beta + 1)/(2 beta + 4).
    std::array<double, 4> ssr_consts = {0.1, 0.5, 1.0, 10.0};
    double c4_sl = 0.95;
    double c4_tl = 1.2;
    TargetFn f_id = TargetFn::f1;
    double sigma = 0.3;
    double c_bandwidth = 0.7;
    int grid_N = 3000;
    int replications = 100;
    std::uint64_t base_seed = 18;
};

// Target size under the configured rule, rounded to the nearest integer with
// a floor of 1. The exponent uses 2 beta + 4 for every a, matching the
// shared region layout of the slope experiments.
std::int64_t target_sample_size(const ExperimentConfig& cfg, std::int64_t n);

double target_value(TargetFn f, double beta, double x);

// Mean squared deviation over the grid x_i = i/N, i = 1..N.
double grid_loss(const std::function<double(double)>& f_true,
                 std::span<const double> f_hat, int grid_N);

struct CellLoss {
    double source_loss = 0.0;  // L
    double target_loss = 0.0;  // L_T
    double pooled_loss = 0.0;  // L_{n, n_T}
};

// One replication: draw the cell's sample (seeded by base_seed, n, rep),
// fit the three estimators with the piecewise bandwidth c * t_n(x), return
// the three grid losses.
CellLoss run_cell(const ExperimentConfig& cfg, std::int64_t n, int rep);

struct CellRecord {
    std::int64_t n = 0;
    std::int64_t n_T = 0;
    int rep = 0;
    CellLoss loss;
};

struct SeriesPoint {
    std::int64_t n = 0;
    std::int64_t n_T = 0;
    double log_n = 0.0;
    double log_sar = 0.0;
    Region region = Region::SD;
};

struct ExperimentResult {
    std::vector<CellRecord> cells;    // one row per (n, rep)
    std::vector<SeriesPoint> series;  // one row per n
};

// Runs every cell (in parallel when threads != 1; 0 picks the hardware
// count) and reduces to the median-based log-SAR series. Output ordering and
// values do not depend on the thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 0);

std::vector<SeriesPoint> log_sar_series(const ExperimentConfig& cfg,
                                        int threads = 0);

// Ordinary least squares line fit; needs two distinct abscissae.
std::pair<double, double> fit_slope(
    std::span<const std::pair<double, double>> points);

// Sum of signed scaled bumps sum_j t(j) psi_j with psi_j supported on
// [(j-1)/m, j/m]; the bump is exp(-1/(1 - (2u - 1)^2)) rescaled once so the
// sum stays in the Hoelder ball of radius kappa.
class WorstCaseFunction {
public:
    WorstCaseFunction(int m, std::vector<int> signs, double beta, double kappa);

    double operator()(double x) const;

    // integral over [0, 1] of the scaled bump squared; each term contributes
    // bump_l2sq() / m^(2 beta + 1) to the squared norm of the sum.
    double bump_l2sq() const { return bump_l2sq_; }
    double scale() const { return scale_; }
    int resolution() const { return m_; }
    int bump_count() const { return static_cast<int>(signs_.size()); }

private:
    int m_;
    std::vector<int> signs_;
    double beta_;
    double scale_;
    double bump_l2sq_;
};

WorstCaseFunction worst_case_function(int m, int j_count,
                                      std::span<const int> signs, double beta,
                                      double kappa);

}  // namespace slp
