#include "slp/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace slp {

Sample::Sample(std::vector<Observation> rows_) : rows(std::move(rows_)) {
    for (const auto& r : rows)
        (r.origin == Origin::source ? n : n_T) += 1;
}

void Sample::push_back(const Observation& obs) {
    rows.push_back(obs);
    (obs.origin == Origin::source ? n : n_T) += 1;
}

EstimatorConfig EstimatorConfig::with_defaults(double beta, double kappa,
                                               double sigma_bar) {
    EstimatorConfig cfg;
    cfg.beta = beta;
    cfg.kappa = kappa;
    cfg.order_l = beta > 1.0 ? static_cast<int>(std::floor(beta)) : 0;
    cfg.T1 = kappa + 4.0 * sigma_bar;
    cfg.T0 = 2.0 * cfg.T1;
    return cfg;
}

double nw_estimate(double x, const Sample& s, double bandwidth) {
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("nw_estimate: bandwidth must be positive");
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : s.rows) {
        if (std::fabs(r.x - x) <= bandwidth) {
            sum += r.y;
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

namespace {

constexpr int kMaxOrder = 7;

// Z(u) = (1, u, u^2/2!, ..., u^l/l!).
void monomial_basis(double u, int l, std::array<double, kMaxOrder + 1>& z) {
    z[0] = 1.0;
    double factorial = 1.0;
    double power = 1.0;
    for (int k = 1; k <= l; ++k) {
        factorial *= k;
        power *= u;
        z[k] = power / factorial;
    }
}

// Solve m * theta = rhs (dense symmetric positive definite, tiny dim) by
// Gaussian elimination with partial pivoting. Returns false on a vanishing
// pivot.
bool solve_dense(std::vector<double> m, std::vector<double> rhs, int dim,
                 std::vector<double>& theta) {
    for (int col = 0; col < dim; ++col) {
        int pivot = col;
        for (int row = col + 1; row < dim; ++row)
            if (std::fabs(m[row * dim + col]) > std::fabs(m[pivot * dim + col]))
                pivot = row;
        if (std::fabs(m[pivot * dim + col]) < 1e-300) return false;
        if (pivot != col) {
            for (int k = 0; k < dim; ++k)
                std::swap(m[col * dim + k], m[pivot * dim + k]);
            std::swap(rhs[col], rhs[pivot]);
        }
        const double inv = 1.0 / m[col * dim + col];
        for (int row = col + 1; row < dim; ++row) {
            const double factor = m[row * dim + col] * inv;
            if (factor == 0.0) continue;
            for (int k = col; k < dim; ++k)
                m[row * dim + k] -= factor * m[col * dim + k];
            rhs[row] -= factor * rhs[col];
        }
    }
    theta.assign(dim, 0.0);
    for (int row = dim - 1; row >= 0; --row) {
        double acc = rhs[row];
        for (int k = row + 1; k < dim; ++k) acc -= m[row * dim + k] * theta[k];
        theta[row] = acc / m[row * dim + row];
    }
    return true;
}

}  // namespace

double local_poly_estimate(double x, const Sample& s, double t,
                           const EstimatorConfig& cfg, double gate_mass) {
    if (!(t > 0.0))
        throw std::invalid_argument("local_poly_estimate: t must be positive");
    if (gate_mass < 0.0)
        throw std::invalid_argument("local_poly_estimate: gate_mass must be >= 0");
    const int l = cfg.order_l;
    if (l < 0 || l > kMaxOrder)
        throw std::invalid_argument("local_poly_estimate: unsupported order");
    const int dim = l + 1;

    std::vector<double> gram(static_cast<std::size_t>(dim) * dim, 0.0);
    std::vector<double> rhs(dim, 0.0);
    std::array<double, kMaxOrder + 1> z{};
    std::size_t count = 0;

    for (const auto& r : s.rows) {
        if (std::fabs(r.x - x) > t) continue;
        ++count;
        monomial_basis((r.x - x) / t, l, z);
        for (int i = 0; i < dim; ++i) {
            rhs[i] += r.y * z[i];
            for (int j = i; j < dim; ++j) gram[i * dim + j] += z[i] * z[j];
        }
    }
    if (count == 0) return 0.0;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < i; ++j) gram[i * dim + j] = gram[j * dim + i];

    if (cfg.gate == GateRule::plugin && !(cfg.T0 > 0.0))
        throw std::invalid_argument(
            "local_poly_estimate: plugin gate needs a positive T0");
    const double total = static_cast<double>(s.rows.size());
    const double threshold = cfg.gate == GateRule::pooled_mass
                                 ? total * gate_mass / 8.0
                                 : total * gate_mass / (16.0 * cfg.T0);
    if (min_eigen_sym(gram, dim) < threshold) return 0.0;

    std::vector<double> theta;
    if (!solve_dense(gram, rhs, dim, theta))
        throw std::runtime_error(
            "local_poly_estimate: singular design despite passing the gate");

    const double value = theta[0];  // Z(0)^T theta
    if (cfg.T1 > 0.0 && std::fabs(value) >= cfg.T1) return 0.0;
    return value;
}

std::vector<double> fit_curve(std::span<const double> grid, const Sample& s,
                              const SpreadContext& ctx,
                              const EstimatorConfig& cfg, FitMode mode) {
    if (grid.empty()) throw std::invalid_argument("fit_curve: empty grid");

    const std::int64_t eff_n = mode == FitMode::target_only
                                   ? 0
                                   : static_cast<std::int64_t>(s.n);
    const std::int64_t eff_nT = mode == FitMode::source_only
                                    ? 0
                                    : static_cast<std::int64_t>(s.n_T);
    if (eff_n + eff_nT < 1)
        throw std::invalid_argument("fit_curve: effective sample is empty");
    SpreadContext eff_ctx(eff_n, eff_nT, ctx.beta, ctx.source, ctx.target);

    Sample subset;
    const Sample* data = &s;
    if (mode != FitMode::pooled) {
        const Origin keep =
            mode == FitMode::source_only ? Origin::source : Origin::target;
        for (const auto& r : s.rows)
            if (r.origin == keep) subset.push_back(r);
        data = &subset;
    }

    const bool use_window_average = cfg.beta <= 1.0 || cfg.order_l == 0;
    std::vector<double> fitted;
    fitted.reserve(grid.size());
    for (const double x : grid) {
        const double t = solve_spread(eff_ctx, x);
        const double bandwidth = cfg.c_bandwidth * t;
        if (use_window_average) {
            fitted.push_back(nw_estimate(x, *data, bandwidth));
        } else {
            const double mass_src =
                eff_n > 0 ? interval_mass(eff_ctx.source, x - bandwidth,
                                          x + bandwidth)
                          : 0.0;
            const double mass_tgt =
                eff_nT > 0 ? interval_mass(eff_ctx.target, x - bandwidth,
                                           x + bandwidth)
                           : 0.0;
            const double gate_mass =
                (static_cast<double>(eff_n) * mass_src +
                 static_cast<double>(eff_nT) * mass_tgt) /
                static_cast<double>(eff_n + eff_nT);
            fitted.push_back(
                local_poly_estimate(x, *data, bandwidth, cfg, gate_mass));
        }
    }
    return fitted;
}

double min_eigen_sym(std::span<const double> m, int dim) {
    if (dim < 1 || static_cast<std::size_t>(dim) * dim != m.size())
        throw std::invalid_argument("min_eigen_sym: bad dimension");
    std::vector<double> a(m.begin(), m.end());
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
            if (std::fabs(a[i * dim + j] - a[j * dim + i]) > 1e-12)
                throw std::invalid_argument("min_eigen_sym: matrix not symmetric");

    // Cyclic Jacobi sweeps; unconditionally convergent for symmetric input.
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = i + 1; j < dim; ++j) off += a[i * dim + j] * a[i * dim + j];
        if (off < 1e-28) break;

        for (int p = 0; p < dim; ++p) {
            for (int q = p + 1; q < dim; ++q) {
                const double apq = a[p * dim + q];
                if (std::fabs(apq) < 1e-300) continue;
                const double app = a[p * dim + p];
                const double aqq = a[q * dim + q];
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) +
                                  std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < dim; ++k) {
                    const double akp = a[k * dim + p];
                    const double akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for (int k = 0; k < dim; ++k) {
                    const double apk = a[p * dim + k];
                    const double aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
            }
        }
    }
    double smallest = a[0];
    for (int i = 1; i < dim; ++i) smallest = std::min(smallest, a[i * dim + i]);
    return smallest;
}

}  // namespace slp
