#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slp/densities.hpp"

namespace slp {

enum class Region { SD, SL, TL, TD };

std::string to_string(Region r);

// Rate in the form n^(-p) * n_T^(-q) * (n_T/n)^r, or (n + n_T)^(-pooled_exp)
// when the pooled flag is set.
struct SymbolicRate {
    double p = 0.0;
    double q = 0.0;
    double r = 0.0;
    bool pooled = false;
    double pooled_exp = 0.0;

    double eval(double n, double n_T) const;
};

struct RateResult {
    Region region = Region::SD;
    double rate_value = 0.0;
    SymbolicRate symbolic;
    bool slp = false;         // synergy occurs
    bool log_factor = false;  // knife-edge a = 2 + 1/(2 beta) carries a log n
};

// Multipliers on the three critical target sizes (and on the n_T vs n split
// used when the source tail is too thin for any synergy). The formulas leave
// these constants free; defaults are 1.
struct RegionConstants {
    double lower = 1.0;        // scales n^((2b+1)/(2b+a))
    double equalizing = 1.0;   // scales n^((2b+1)^2/(2b(2b+a)))
    double upper = 1.0;        // scales n
    double low_a_split = 1.0;  // scales n in the a <= 2 + 1/(2b) branch
};

// Sample-size relationship region; boundary ties resolve to the earlier
// region in the order SD, SL, TL, TD.
Region classify_region(double n, double n_T, double a, double beta,
                       const RegionConstants& consts = {});

// Optimal transfer learning rate for a Beta(a, 1) source and uniform target.
RateResult tlr(double n, double n_T, double a, double beta);

// Synergistic acceleration rate; 1 outside the SL/TL regions and whenever
// a <= 2 + 1/(2 beta).
double sar(double n, double n_T, double a, double beta);

// Theory slopes of log SAR against log n for the power-law target-size rules
// n_T = const * n^((2b+1)/(2b+a) * (1 + c4)).
double sl_slope(double beta, double a, double c4_sl);
double tl_slope(double beta, double a, double c4_tl);

struct TspResult {
    std::vector<double> tsp_points;                      // qualifying s_j
    std::vector<std::pair<double, double>> side_pairs;   // J: (a^A, a^T)
    std::optional<std::pair<double, double>> argmin;     // ratio-minimizing pair
};

// Transfer singularity points of a validated source/target spec pair, the J
// set of qualifying per-side order pairs, and the pair minimizing
// (2b + a^T)/(2b + a^A). Sides not declared count as order 1 (density bounded
// away from zero); the missing endpoint sides at s = 0 and s = 1 are skipped.
TspResult tsp_set(const SingularityDensitySpec& source_spec,
                  const SingularityDensitySpec& target_spec, double beta);

// General multi-singularity transfer learning rate. Falls back to the pooled
// classical rate when no transfer singularity point exists.
RateResult general_tlr(double n, double n_T,
                       const SingularityDensitySpec& source_spec,
                       const SingularityDensitySpec& target_spec, double beta);

}  // namespace slp
