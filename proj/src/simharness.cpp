#include "slp/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "slp/estimators.hpp"
#include "slp/quadrature.hpp"
#include "slp/rng.hpp"
#include "slp/spread.hpp"

namespace slp {

std::int64_t target_sample_size(const ExperimentConfig& cfg, std::int64_t n) {
    const double exponent = (2.0 * cfg.beta + 1.0) / (2.0 * cfg.beta + 4.0);
    const double nd = static_cast<double>(n);
    double value = 0.0;
    switch (cfg.nt_rule) {
        case NTRule::SSR1:
            value = cfg.ssr_consts[0] * std::pow(nd, exponent);
            break;
        case NTRule::SSR2:
            value = cfg.ssr_consts[1] * std::pow(nd, exponent * (1.0 + cfg.c4_sl));
            break;
        case NTRule::SSR3:
            value = cfg.ssr_consts[2] * std::pow(nd, exponent * (1.0 + cfg.c4_tl));
            break;
        case NTRule::SSR4:
            value = cfg.ssr_consts[3] * nd;
            break;
    }
    return std::max<std::int64_t>(1, std::llround(value));
}

double target_value(TargetFn f, double beta, double x) {
    switch (f) {
        case TargetFn::f1: return 0.2 * std::pow(x, beta);
        case TargetFn::f2: return 0.2 * std::pow(std::fabs(x - 0.5), beta);
    }
    return 0.0;
}

double grid_loss(const std::function<double(double)>& f_true,
                 std::span<const double> f_hat, int grid_N) {
    if (static_cast<int>(f_hat.size()) != grid_N)
        throw std::invalid_argument("grid_loss: curve length differs from grid_N");
    double acc = 0.0;
    for (int i = 1; i <= grid_N; ++i) {
        const double x = static_cast<double>(i) / grid_N;
        const double d = f_hat[i - 1] - f_true(x);
        acc += d * d;
    }
    return acc / grid_N;
}

namespace {

// Points sorted by x with response prefix sums: a closed-window mean costs
// two binary searches.
struct SortedCurveData {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> prefix;

    void build(std::vector<std::pair<double, double>>& points) {
        std::sort(points.begin(), points.end());
        xs.resize(points.size());
        ys.resize(points.size());
        prefix.assign(points.size() + 1, 0.0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            xs[i] = points[i].first;
            ys[i] = points[i].second;
            prefix[i + 1] = prefix[i] + ys[i];
        }
    }

    std::pair<std::size_t, std::size_t> window(double x, double h) const {
        const auto lo = std::lower_bound(xs.begin(), xs.end(), x - h);
        const auto hi = std::upper_bound(xs.begin(), xs.end(), x + h);
        return {static_cast<std::size_t>(lo - xs.begin()),
                static_cast<std::size_t>(hi - xs.begin())};
    }

    double window_mean(double x, double h) const {
        const auto [lo, hi] = window(x, h);
        if (hi == lo) return 0.0;
        return (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
};

// Local polynomial fit over the sorted window, gated exactly as the sample
// based path.
double window_local_poly(const SortedCurveData& data, double x, double h,
                         const EstimatorConfig& cfg, double gate_mass,
                         std::size_t total_rows) {
    const auto [lo, hi] = data.window(x, h);
    if (hi == lo) return 0.0;
    Sample window_sample;
    for (std::size_t i = lo; i < hi; ++i)
        window_sample.push_back({data.xs[i], data.ys[i], Origin::source});
    // Rebase the gate on the full row count, not the window size.
    const double rescaled_mass =
        gate_mass * static_cast<double>(total_rows) /
        static_cast<double>(window_sample.rows.size());
    return local_poly_estimate(x, window_sample, h, cfg, rescaled_mass);
}

struct CellEstimator {
    SortedCurveData data;
    double n_eff = 0.0;
    double nT_eff = 0.0;
};

}  // namespace

CellLoss run_cell(const ExperimentConfig& cfg, std::int64_t n, int rep) {
    if (rep < 0 || rep >= cfg.replications)
        throw std::invalid_argument("run_cell: rep outside [0, replications)");
    const std::int64_t n_T = target_sample_size(cfg, n);

    Rng rng(cell_seed(cfg.base_seed, static_cast<std::uint64_t>(n),
                      static_cast<std::uint64_t>(rep)));

    std::vector<std::pair<double, double>> source_pts, target_pts;
    source_pts.reserve(n);
    target_pts.reserve(n_T);
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = std::pow(rng.uniform(), 1.0 / cfg.a);
        source_pts.emplace_back(
            x, target_value(cfg.f_id, cfg.beta, x) + cfg.sigma * rng.normal());
    }
    for (std::int64_t i = 0; i < n_T; ++i) {
        const double x = rng.uniform();
        target_pts.emplace_back(
            x, target_value(cfg.f_id, cfg.beta, x) + cfg.sigma * rng.normal());
    }

    CellEstimator source_only, target_only, pooled;
    {
        std::vector<std::pair<double, double>> all = source_pts;
        all.insert(all.end(), target_pts.begin(), target_pts.end());
        pooled.data.build(all);
        pooled.n_eff = static_cast<double>(n);
        pooled.nT_eff = static_cast<double>(n_T);
        source_only.data.build(source_pts);
        source_only.n_eff = static_cast<double>(n);
        target_only.data.build(target_pts);
        target_only.nT_eff = static_cast<double>(n_T);
    }

    const bool window_average = cfg.beta <= 1.0;
    EstimatorConfig est_cfg = EstimatorConfig::with_defaults(
        cfg.beta, /*kappa=*/0.2, /*sigma_bar=*/cfg.sigma);
    est_cfg.c_bandwidth = cfg.c_bandwidth;

    const auto fit_loss = [&](const CellEstimator& est) {
        double acc = 0.0;
        const std::size_t rows = est.data.xs.size();
        for (int i = 1; i <= cfg.grid_N; ++i) {
            const double x = static_cast<double>(i) / cfg.grid_N;
            const double h =
                cfg.c_bandwidth *
                spread_order(x, est.n_eff, est.nT_eff, cfg.a, cfg.beta);
            double fhat;
            if (window_average) {
                fhat = est.data.window_mean(x, h);
            } else {
                // Known-density gate: pooled window mass of the Beta(a, 1)
                // source and uniform target, divided by the row count.
                const double hi_x = std::min(x + h, 1.0);
                const double lo_x = std::max(x - h, 0.0);
                const double mass_src = std::pow(hi_x, cfg.a) - std::pow(lo_x, cfg.a);
                const double mass_tgt = hi_x - lo_x;
                const double gate_mass =
                    (est.n_eff * mass_src + est.nT_eff * mass_tgt) /
                    static_cast<double>(rows);
                fhat = window_local_poly(est.data, x, h, est_cfg, gate_mass, rows);
            }
            const double d = fhat - target_value(cfg.f_id, cfg.beta, x);
            acc += d * d;
        }
        return acc / cfg.grid_N;
    };

    CellLoss loss;
    loss.source_loss = fit_loss(source_only);
    loss.target_loss = fit_loss(target_only);
    loss.pooled_loss = fit_loss(pooled);
    return loss;
}

namespace {

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    if (m == 0) return 0.0;
    return m % 2 == 1 ? values[m / 2]
                      : 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
    if (cfg.replications < 1)
        throw std::invalid_argument("run_experiment: need replications >= 1");

    struct Job {
        std::size_t n_index;
        int rep;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i)
        for (int rep = 0; rep < cfg.replications; ++rep) jobs.push_back({i, rep});

    std::vector<CellLoss> losses(jobs.size());
    unsigned worker_count = threads > 0
                                ? static_cast<unsigned>(threads)
                                : std::max(1u, std::thread::hardware_concurrency());
    worker_count = std::min<unsigned>(worker_count,
                                      std::max<std::size_t>(1, jobs.size()));

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs.size()) return;
            losses[k] = run_cell(cfg, cfg.n_list[jobs[k].n_index], jobs[k].rep);
        }
    };
    if (worker_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < worker_count; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    ExperimentResult result;
    result.cells.reserve(jobs.size());
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        const std::int64_t n = cfg.n_list[jobs[k].n_index];
        result.cells.push_back(
            {n, target_sample_size(cfg, n), jobs[k].rep, losses[k]});
    }

    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
        std::vector<double> l, l_t, l_pool;
        for (std::size_t k = 0; k < jobs.size(); ++k) {
            if (jobs[k].n_index != i) continue;
            l.push_back(losses[k].source_loss);
            l_t.push_back(losses[k].target_loss);
            l_pool.push_back(losses[k].pooled_loss);
        }
        const double best_single = std::min(median(l), median(l_t));
        const double pool_med = median(l_pool);
        double log_sar = 0.0;
        if (pool_med > 0.0) {
            log_sar = std::log(best_single / pool_med);
        } else if (best_single > 0.0) {
            log_sar = std::numeric_limits<double>::infinity();
        }
        const std::int64_t n = cfg.n_list[i];
        const std::int64_t n_T = target_sample_size(cfg, n);
        result.series.push_back(
            {n, n_T, std::log(static_cast<double>(n)), log_sar,
             classify_region(static_cast<double>(n), static_cast<double>(n_T),
                             cfg.a, cfg.beta)});
    }
    return result;
}

std::vector<SeriesPoint> log_sar_series(const ExperimentConfig& cfg,
                                        int threads) {
    return run_experiment(cfg, threads).series;
}

std::pair<double, double> fit_slope(
    std::span<const std::pair<double, double>> points) {
    if (points.size() < 2)
        throw std::invalid_argument("fit_slope: need at least two points");
    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& [x, y] : points) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= static_cast<double>(points.size());
    mean_y /= static_cast<double>(points.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_slope: degenerate abscissae");
    const double slope = sxy / sxx;
    return {slope, mean_y - slope * mean_x};
}

namespace {

double raw_bump(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double w = 2.0 * u - 1.0;
    return std::exp(-1.0 / (1.0 - w * w));
}

// Hoelder quotient of g on [0, 1] with exponent s, maximized over a dense
// grid of pairs. s = 0 degenerates to the sup of |g(x) - g(y)|.
double holder_quotient(const std::function<double(double)>& g, double s) {
    constexpr int kGrid = 512;
    std::vector<double> values(kGrid + 1);
    for (int i = 0; i <= kGrid; ++i)
        values[i] = g(static_cast<double>(i) / kGrid);
    double quotient = 0.0;
    for (int i = 0; i <= kGrid; ++i) {
        for (int j = i + 1; j <= kGrid; ++j) {
            const double gap = static_cast<double>(j - i) / kGrid;
            const double ratio =
                std::fabs(values[j] - values[i]) / std::pow(gap, s);
            quotient = std::max(quotient, ratio);
        }
    }
    return quotient;
}

}  // namespace

WorstCaseFunction::WorstCaseFunction(int m, std::vector<int> signs, double beta,
                                     double kappa)
    : m_(m), signs_(std::move(signs)), beta_(beta) {
    if (m < 1) throw std::invalid_argument("WorstCaseFunction: need m >= 1");
    if (signs_.empty() || static_cast<int>(signs_.size()) > m)
        throw std::invalid_argument("WorstCaseFunction: need 1 <= J <= m");
    for (const int s : signs_)
        if (s != 1 && s != -1)
            throw std::invalid_argument("WorstCaseFunction: signs must be +-1");
    if (!(beta > 0.0) || !(kappa > 0.0))
        throw std::invalid_argument("WorstCaseFunction: beta, kappa must be positive");

    // Class membership reduces to the bump alone: within one support cell the
    // quotient of the sum equals the scaled bump quotient, and across cells
    // it picks up at most 2^(1 - s). Scale once so both that and the sup
    // bound sit 5% inside the kappa ball.
    const int l = beta <= 1.0 ? 0 : static_cast<int>(std::floor(beta));
    const double s = beta - l;
    std::function<double(double)> derivative = raw_bump;
    double step = 1e-4;
    for (int k = 0; k < l; ++k) {
        const auto prev = derivative;
        derivative = [prev, step](double u) {
            return (prev(u + step) - prev(u - step)) / (2.0 * step);
        };
    }
    const double quotient = holder_quotient(derivative, s);
    const double cross_cell = std::pow(2.0, 1.0 - s) * quotient;
    constexpr double kBumpSup = 0.36787944117144233;  // exp(-1) at u = 1/2
    scale_ = kappa / (1.05 * std::max(cross_cell, kBumpSup));

    bump_l2sq_ = adaptive_simpson(
        [this](double u) {
            const double v = scale_ * raw_bump(u);
            return v * v;
        },
        0.0, 1.0, 1e-14);
}

double WorstCaseFunction::operator()(double x) const {
    if (x < 0.0 || x > 1.0) return 0.0;
    const double scaled = x * m_;
    auto j = static_cast<int>(std::floor(scaled));
    if (j >= m_) j = m_ - 1;  // x = 1 belongs to the last cell
    if (j >= static_cast<int>(signs_.size())) return 0.0;
    return signs_[j] * std::pow(static_cast<double>(m_), -beta_) * scale_ *
           raw_bump(scaled - j);
}

WorstCaseFunction worst_case_function(int m, int j_count,
                                      std::span<const int> signs, double beta,
                                      double kappa) {
    if (static_cast<int>(signs.size()) != j_count)
        throw std::invalid_argument("worst_case_function: sign count mismatch");
    return WorstCaseFunction(m, {signs.begin(), signs.end()}, beta, kappa);
}

}  // namespace slp
