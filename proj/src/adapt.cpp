#include "slp/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "slp/special.hpp"

namespace slp {

double beta_log_likelihood(std::span<const double> xs, double a1, double a2) {
    double sum_log = 0.0;
    double sum_log1m = 0.0;
    std::size_t m = 0;
    for (const double x : xs) {
        if (x <= 0.0 || x >= 1.0) continue;
        sum_log += std::log(x);
        sum_log1m += std::log1p(-x);
        ++m;
    }
    return (a1 - 1.0) * sum_log + (a2 - 1.0) * sum_log1m -
           static_cast<double>(m) * log_beta(a1, a2);
}

namespace {

struct SufficientStats {
    double mean_log = 0.0;
    double mean_log1m = 0.0;
    std::size_t m = 0;
};

SufficientStats interior_stats(std::span<const double> xs) {
    SufficientStats s;
    for (const double x : xs) {
        if (x <= 0.0 || x >= 1.0) continue;
        s.mean_log += std::log(x);
        s.mean_log1m += std::log1p(-x);
        ++s.m;
    }
    if (s.m < 2)
        throw std::invalid_argument(
            "beta_mle: need at least two points strictly inside (0, 1)");
    s.mean_log /= static_cast<double>(s.m);
    s.mean_log1m /= static_cast<double>(s.m);
    return s;
}

// Per-observation log-likelihood as a function of the shapes only.
double mean_loglik(const SufficientStats& s, double a1, double a2) {
    return (a1 - 1.0) * s.mean_log + (a2 - 1.0) * s.mean_log1m - log_beta(a1, a2);
}

double golden_max_1d(const std::function<double(double)>& f, double lo,
                     double hi) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int iter = 0; iter < 200 && (b - a) > 1e-12 * (1.0 + b); ++iter) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

BetaMleResult beta_mle(std::span<const double> xs, double a_lo, double a_hi,
                       bool fix_a2) {
    if (!(a_lo > 0.0) || !(a_hi > a_lo))
        throw std::invalid_argument("beta_mle: need 0 < a_lo < a_hi");
    const SufficientStats stats = interior_stats(xs);

    if (fix_a2) {
        // Beta(a, 1): closed-form MLE a = -1 / mean(log x).
        const double a_hat = -1.0 / stats.mean_log;
        return {std::clamp(a_hat, a_lo, a_hi), 1.0};
    }

    bool spread_out = false;
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] != xs[0]) spread_out = true;
    if (!spread_out)
        throw std::runtime_error("beta_mle: degenerate sample (all points equal)");

    // Safeguarded Newton on the stationarity equations
    //   psi(a1) - psi(a1 + a2) = mean log x,
    //   psi(a2) - psi(a1 + a2) = mean log (1 - x),
    // with projection onto the box and backtracking on the likelihood.
    double a1 = std::clamp(1.0, a_lo, a_hi);
    double a2 = std::clamp(1.0, a_lo, a_hi);
    double value = mean_loglik(stats, a1, a2);
    bool converged = false;

    for (int iter = 0; iter < 100; ++iter) {
        const double psi_sum = digamma(a1 + a2);
        const double g1 = stats.mean_log - (digamma(a1) - psi_sum);
        const double g2 = stats.mean_log1m - (digamma(a2) - psi_sum);

        // KKT-style check: ignore gradient components pushing out of the box.
        const double p1 =
            (a1 <= a_lo && g1 < 0.0) || (a1 >= a_hi && g1 > 0.0) ? 0.0 : g1;
        const double p2 =
            (a2 <= a_lo && g2 < 0.0) || (a2 >= a_hi && g2 > 0.0) ? 0.0 : g2;
        if (std::fabs(p1) < 1e-10 && std::fabs(p2) < 1e-10) {
            converged = true;
            break;
        }

        const double tri_sum = trigamma(a1 + a2);
        const double h11 = trigamma(a1) - tri_sum;
        const double h22 = trigamma(a2) - tri_sum;
        const double h12 = -tri_sum;
        const double det = h11 * h22 - h12 * h12;
        if (!(det > 0.0) || !(h11 > 0.0)) break;  // indefinite, use fallback

        // Newton step for the gradient system (Hessian of -loglik is
        // [h11 h12; h12 h22]).
        double step1 = (h22 * g1 - h12 * g2) / det;
        double step2 = (h11 * g2 - h12 * g1) / det;

        double scale = 1.0;
        bool improved = false;
        for (int bt = 0; bt < 30; ++bt) {
            const double c1 = std::clamp(a1 + scale * step1, a_lo, a_hi);
            const double c2 = std::clamp(a2 + scale * step2, a_lo, a_hi);
            const double candidate = mean_loglik(stats, c1, c2);
            if (candidate >= value - 1e-15) {
                if (c1 == a1 && c2 == a2) break;  // pinned at the boundary
                a1 = c1;
                a2 = c2;
                value = candidate;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!improved) break;
    }

    if (!converged) {
        // Coordinate golden-section on the profile likelihood.
        for (int round = 0; round < 60; ++round) {
            const double prev1 = a1, prev2 = a2;
            a1 = golden_max_1d(
                [&](double a) { return mean_loglik(stats, a, a2); }, a_lo, a_hi);
            a2 = golden_max_1d(
                [&](double a) { return mean_loglik(stats, a1, a); }, a_lo, a_hi);
            if (std::fabs(a1 - prev1) < 1e-11 && std::fabs(a2 - prev2) < 1e-11)
                break;
        }
    }
    return {a1, a2};
}

LepskiConfig LepskiConfig::with_defaults(double beta_lo, double beta_hi,
                                         double kappa) {
    LepskiConfig cfg;
    cfg.beta_lo = beta_lo;
    cfg.beta_hi = beta_hi;
    cfg.kappa = kappa;
    cfg.c_sel = 4.0 * kappa + 0.1;
    cfg.c_shrink =
        (2.0 * beta_hi + 1.0) * (2.0 * beta_hi + 1.0) / (2.0 * beta_lo) + 0.1;
    cfg.validate();
    return cfg;
}

void LepskiConfig::validate() const {
    if (!(beta_lo > 0.0) || !(beta_hi > beta_lo))
        throw std::invalid_argument("LepskiConfig: need 0 < beta_lo < beta_hi");
    if (!(trim > 0.0) || !(trim < 0.5))
        throw std::invalid_argument("LepskiConfig: trim must be in (0, 0.5)");
    if (!(c_sel > 4.0 * kappa))
        throw std::invalid_argument("LepskiConfig: c_sel must exceed 4 kappa");
    const double shrink_floor =
        (2.0 * beta_hi + 1.0) * (2.0 * beta_hi + 1.0) / (2.0 * beta_lo);
    if (!(c_shrink > shrink_floor))
        throw std::invalid_argument(
            "LepskiConfig: c_shrink must exceed (2 beta_hi + 1)^2 / (2 beta_lo)");
    if (eval_grid_size < 2)
        throw std::invalid_argument("LepskiConfig: eval_grid_size too small");
}

std::pair<int, int> lepski_tau_range(std::int64_t m, const LepskiConfig& cfg) {
    if (m < 2) throw std::invalid_argument("lepski_tau_range: need m >= 2");
    const double log_m = std::log(static_cast<double>(m));
    const double log2 = std::log(2.0);
    // Largest tau with tau * log 2 * (2 beta + 1) <= log m, with a relative
    // guard so exact dyadic boundaries resolve the way the formulas read.
    const auto max_tau = [&](double beta) {
        int tau = 0;
        while ((tau + 1) * log2 * (2.0 * beta + 1.0) <=
               log_m * (1.0 + 1e-12) + 1e-12)
            ++tau;
        return tau;
    };
    const int tau_star = max_tau(cfg.beta_lo) + 1;
    const int tau_low = max_tau(cfg.beta_hi);
    return {tau_star, tau_low};
}

namespace {

// beta_tau solves 2^(-tau) = m^(-1/(2 beta_tau + 1)).
double beta_of_tau(int tau, double log_m) {
    return 0.5 * (log_m / (tau * std::log(2.0)) - 1.0);
}

}  // namespace

LepskiResult lepski_beta(const Sample& half, const LepskiConfig& cfg) {
    cfg.validate();
    const std::int64_t m = static_cast<std::int64_t>(half.rows.size());
    const auto [tau_star, tau_low] = lepski_tau_range(m, cfg);
    if (tau_low < 1)
        throw std::invalid_argument(
            "lepski_beta: sample too small for a dyadic range with mu < 1");

    const double span = 1.0 - 2.0 * cfg.trim;
    const double log_m = std::log(static_cast<double>(m));

    // Bin means at every level. Piecewise-constant functions on dyadic bins.
    std::vector<std::vector<double>> level_means(tau_star + 1);
    for (int tau = tau_low; tau <= tau_star; ++tau) {
        const std::int64_t bins = std::int64_t{1} << tau;
        std::vector<double> sums(bins, 0.0);
        std::vector<std::int64_t> counts(bins, 0);
        const double width = span / static_cast<double>(bins);
        for (const auto& row : half.rows) {
            if (row.x < cfg.trim || row.x > 1.0 - cfg.trim) continue;
            auto bin = static_cast<std::int64_t>((row.x - cfg.trim) / width);
            bin = std::clamp<std::int64_t>(bin, 0, bins - 1);
            sums[bin] += row.y;
            counts[bin] += 1;
        }
        for (std::int64_t b = 0; b < bins; ++b) {
            if (counts[b] == 0)
                throw std::runtime_error("lepski_beta: empty bin at tau=" +
                                         std::to_string(tau) + ", bin=" +
                                         std::to_string(b));
            sums[b] /= static_cast<double>(counts[b]);
        }
        level_means[tau] = std::move(sums);
    }

    const auto level_value = [&](int tau, double x) {
        const std::int64_t bins = std::int64_t{1} << tau;
        auto bin = static_cast<std::int64_t>((x - cfg.trim) / (span / bins));
        bin = std::clamp<std::int64_t>(bin, 0, bins - 1);
        return level_means[tau][bin];
    };

    const auto sup_distance = [&](int tau_a, int tau_b) {
        double sup = 0.0;
        for (int g = 0; g < cfg.eval_grid_size; ++g) {
            const double x =
                cfg.trim + span * (g + 0.5) / static_cast<double>(cfg.eval_grid_size);
            sup = std::max(sup, std::fabs(level_value(tau_a, x) - level_value(tau_b, x)));
        }
        return sup;
    };

    int tau_hat = tau_star;  // vacuous comparison set at the top level
    for (int tau = tau_low; tau <= tau_star; ++tau) {
        bool accepted = true;
        for (int tau2 = tau + 1; tau2 <= tau_star; ++tau2) {
            const double mu2 = std::pow(2.0, -tau2);
            const double envelope =
                cfg.c_sel * std::pow(mu2, beta_of_tau(tau2, log_m)) * log_m;
            if (sup_distance(tau, tau2) > envelope) {
                accepted = false;
                break;
            }
        }
        if (accepted) {
            tau_hat = tau;
            break;
        }
    }

    const double shrink = cfg.c_shrink * std::log(log_m) / log_m;
    double beta_hat = std::min(beta_of_tau(tau_hat, log_m) - shrink, cfg.beta_hi);
    beta_hat = std::clamp(beta_hat, cfg.beta_lo, cfg.beta_hi);
    return {beta_hat, tau_hat, tau_star, tau_low};
}

std::pair<Sample, Sample> split_halves(const Sample& s) {
    const std::size_t keep_src = s.n / 2;
    const std::size_t keep_tgt = s.n_T / 2;
    Sample first, second;
    std::size_t seen_src = 0, seen_tgt = 0;
    for (const auto& row : s.rows) {
        std::size_t& seen = row.origin == Origin::source ? seen_src : seen_tgt;
        const std::size_t keep = row.origin == Origin::source ? keep_src : keep_tgt;
        (seen < keep ? first : second).push_back(row);
        ++seen;
    }
    return {std::move(first), std::move(second)};
}

Sample pick_lepski_half(const Sample& s) {
    const auto halves = split_halves(s);
    const Origin keep = s.n > s.n_T ? Origin::source : Origin::target;
    Sample out;
    for (const auto& row : halves.first.rows)
        if (row.origin == keep) out.push_back(row);
    return out;
}

PluginFit plugin_fit_curve(std::span<const double> grid, const Sample& s,
                           double a_lo, double a_hi, EstimatorConfig cfg) {
    auto [first, second] = split_halves(s);

    const auto population_xs = [](const Sample& sample, Origin which) {
        std::vector<double> xs;
        for (const auto& row : sample.rows)
            if (row.origin == which) xs.push_back(row.x);
        return xs;
    };

    PluginFit out;
    const auto src_xs = population_xs(first, Origin::source);
    const auto tgt_xs = population_xs(first, Origin::target);
    // A population absent from the fit contributes nothing to the bandwidth;
    // its density slot is a placeholder.
    out.source_shapes =
        src_xs.size() >= 2 ? beta_mle(src_xs, a_lo, a_hi) : BetaMleResult{};
    out.target_shapes =
        tgt_xs.size() >= 2 ? beta_mle(tgt_xs, a_lo, a_hi) : BetaMleResult{};

    cfg.gate = GateRule::plugin;
    SpreadContext ctx(static_cast<std::int64_t>(second.n),
                      static_cast<std::int64_t>(second.n_T), cfg.beta,
                      BetaDensity{out.source_shapes.a1, out.source_shapes.a2},
                      BetaDensity{out.target_shapes.a1, out.target_shapes.a2});
    out.fitted = fit_curve(grid, second, ctx, cfg, FitMode::pooled);
    return out;
}

}  // namespace slp
