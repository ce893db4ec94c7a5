#include "slp/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace slp {

std::string to_string(Region r) {
    switch (r) {
        case Region::SD: return "SD";
        case Region::SL: return "SL";
        case Region::TL: return "TL";
        case Region::TD: return "TD";
    }
    return "??";
}

double SymbolicRate::eval(double n, double n_T) const {
    if (pooled) return std::pow(n + n_T, -pooled_exp);
    double value = 1.0;
    if (p != 0.0) value *= std::pow(n, -p);
    if (q != 0.0) value *= std::pow(n_T, -q);
    if (r != 0.0) value *= std::pow(n_T / n, r);
    return value;
}

namespace {

bool thin_source_tail(double a, double beta) {
    // a <= 2 + 1/(2 beta), where pooling alone is already optimal.
    return a <= 2.0 + 1.0 / (2.0 * beta) + 1e-12;
}

bool knife_edge(double a, double beta) {
    return std::fabs(a - (2.0 + 1.0 / (2.0 * beta))) <= 1e-12;
}

double lower_exponent(double a, double beta) {
    return (2.0 * beta + 1.0) / (2.0 * beta + a);
}

double equalizing_exponent(double a, double beta) {
    const double num = (2.0 * beta + 1.0) * (2.0 * beta + 1.0);
    return num / (2.0 * beta * (2.0 * beta + a));
}

void check_rate_inputs(double n, double n_T, double a, double beta) {
    if (!(a > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("rates: a and beta must be positive");
    if (n < 0.0 || n_T < 0.0 || !(n + n_T >= 1.0))
        throw std::invalid_argument("rates: need n + n_T >= 1");
}

}  // namespace

Region classify_region(double n, double n_T, double a, double beta,
                       const RegionConstants& consts) {
    check_rate_inputs(n, n_T, a, beta);
    if (thin_source_tail(a, beta))
        return n_T <= consts.low_a_split * n ? Region::SD : Region::TD;
    if (n_T <= consts.lower * std::pow(n, lower_exponent(a, beta)))
        return Region::SD;
    if (n_T <= consts.equalizing * std::pow(n, equalizing_exponent(a, beta)))
        return Region::SL;
    if (n_T <= consts.upper * n) return Region::TL;
    return Region::TD;
}

RateResult tlr(double n, double n_T, double a, double beta) {
    check_rate_inputs(n, n_T, a, beta);
    RateResult out;
    out.region = classify_region(n, n_T, a, beta);
    out.log_factor = knife_edge(a, beta);

    if (thin_source_tail(a, beta)) {
        out.symbolic.pooled = true;
        out.symbolic.pooled_exp = 2.0 * beta / (2.0 * beta + 1.0);
    } else {
        switch (out.region) {
            case Region::SD:
                out.symbolic.p = lower_exponent(a, beta);
                break;
            case Region::SL:
            case Region::TL:
                out.symbolic.q = 2.0 * beta / (2.0 * beta + 1.0);
                out.symbolic.r = 1.0 / (a - 1.0);
                out.slp = true;
                break;
            case Region::TD:
                out.symbolic.q = 2.0 * beta / (2.0 * beta + 1.0);
                break;
        }
    }
    out.rate_value = out.symbolic.eval(n, n_T);
    return out;
}

double sar(double n, double n_T, double a, double beta) {
    check_rate_inputs(n, n_T, a, beta);
    if (thin_source_tail(a, beta)) return 1.0;
    switch (classify_region(n, n_T, a, beta)) {
        case Region::SL:
            return std::pow(n_T * std::pow(n, -lower_exponent(a, beta)),
                            2.0 * beta / (2.0 * beta + 1.0) - 1.0 / (a - 1.0));
        case Region::TL:
            return std::pow(n / n_T, 1.0 / (a - 1.0));
        default:
            return 1.0;
    }
}

double sl_slope(double beta, double a, double c4_sl) {
    return c4_sl * lower_exponent(a, beta) *
           (2.0 * beta / (2.0 * beta + 1.0) - 1.0 / (a - 1.0));
}

double tl_slope(double beta, double a, double c4_tl) {
    return (1.0 - lower_exponent(a, beta) * (1.0 + c4_tl)) / (a - 1.0);
}

namespace {

// Middle-region exponent on n_T/n in the general rate.
double general_ratio_exponent(double a_src, double a_tgt, double beta) {
    return (1.0 + (a_tgt - 1.0) / (2.0 * beta + 1.0)) / (a_src - a_tgt);
}

}  // namespace

TspResult tsp_set(const SingularityDensitySpec& source_spec,
                  const SingularityDensitySpec& target_spec, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("tsp_set: beta must be positive");
    if (source_spec.points.size() != target_spec.points.size())
        throw std::invalid_argument(
            "tsp_set: source and target singular point lists differ");
    for (std::size_t j = 0; j < source_spec.points.size(); ++j)
        if (std::fabs(source_spec.points[j].s - target_spec.points[j].s) > 1e-12)
            throw std::invalid_argument(
                "tsp_set: source and target singular point lists differ");

    TspResult out;
    const double synergy_gap = 1.0 + 1.0 / (2.0 * beta);

    for (std::size_t j = 0; j < source_spec.points.size(); ++j) {
        const auto& src = source_spec.points[j];
        const auto& tgt = target_spec.points[j];
        bool qualifies = false;
        for (const bool left : {true, false}) {
            // Endpoint sides do not exist: no left side at s = 0, no right
            // side at s = 1. Undeclared orders mean the density stays away
            // from zero on that side (order 1).
            if (left && src.s <= 0.0) continue;
            if (!left && src.s >= 1.0) continue;
            const double a_src =
                (left ? src.left_order : src.right_order).value_or(1.0);
            const double a_tgt =
                (left ? tgt.left_order : tgt.right_order).value_or(1.0);
            if (a_src > 1.0 + a_tgt * synergy_gap) {
                qualifies = true;
                out.side_pairs.emplace_back(a_src, a_tgt);
            }
        }
        if (qualifies) out.tsp_points.push_back(src.s);
    }

    if (!out.side_pairs.empty()) {
        auto best = out.side_pairs.front();
        double best_ratio =
            (2.0 * beta + best.second) / (2.0 * beta + best.first);
        for (const auto& pair : out.side_pairs) {
            const double ratio =
                (2.0 * beta + pair.second) / (2.0 * beta + pair.first);
            if (ratio < best_ratio - 1e-12) {
                best = pair;
                best_ratio = ratio;
            } else if (std::fabs(ratio - best_ratio) <= 1e-12) {
                // Ties pick the slowest middle-branch rate: the overall rate
                // is the worst across the transfer singularity points.
                if (general_ratio_exponent(pair.first, pair.second, beta) <
                    general_ratio_exponent(best.first, best.second, beta)) {
                    best = pair;
                }
            }
        }
        out.argmin = best;
    }
    return out;
}

RateResult general_tlr(double n, double n_T,
                       const SingularityDensitySpec& source_spec,
                       const SingularityDensitySpec& target_spec, double beta) {
    check_rate_inputs(n, n_T, 1.0, beta);
    const TspResult tsp = tsp_set(source_spec, target_spec, beta);

    RateResult out;
    if (!tsp.argmin) {
        out.region = n_T <= n ? Region::SD : Region::TD;
        out.symbolic.pooled = true;
        out.symbolic.pooled_exp = 2.0 * beta / (2.0 * beta + 1.0);
        out.rate_value = out.symbolic.eval(n, n_T);
        return out;
    }

    const auto [a_src, a_tgt] = *tsp.argmin;
    const double lower_exp = (2.0 * beta + a_tgt) / (2.0 * beta + a_src);
    const double equalizing_exp = lower_exp * (2.0 * beta + 1.0) / (2.0 * beta);

    if (n_T <= std::pow(n, lower_exp)) {
        out.region = Region::SD;
        out.symbolic.p = lower_exp;
    } else if (n_T <= n) {
        out.region =
            n_T <= std::pow(n, equalizing_exp) ? Region::SL : Region::TL;
        out.symbolic.q = 2.0 * beta / (2.0 * beta + 1.0);
        out.symbolic.r = general_ratio_exponent(a_src, a_tgt, beta);
        out.slp = true;
    } else {
        out.region = Region::TD;
        out.symbolic.q = 2.0 * beta / (2.0 * beta + 1.0);
    }
    out.rate_value = out.symbolic.eval(n, n_T);
    return out;
}

}  // namespace slp
