#include "slp/densities.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "slp/quadrature.hpp"
#include "slp/special.hpp"

namespace slp {

BetaDensity::BetaDensity(double a1_, double a2_) : a1(a1_), a2(a2_) {
    if (!(a1 > 0.0) || !(a2 > 0.0))
        throw std::invalid_argument("BetaDensity: shape parameters must be positive");
}

namespace {

void check_unit_interval(double x, const char* who) {
    if (std::isnan(x) || x < 0.0 || x > 1.0)
        throw std::domain_error(std::string(who) + ": x outside [0, 1]");
}

// (x)^e with the 0^0 = 1 convention used throughout the piece algebra.
double pow0(double x, double e) {
    if (e == 0.0) return 1.0;
    return std::pow(x, e);
}

// Mass of one piece on [piece.lo, x]: the factor integral is an incomplete
// beta with shapes (left_exp, right_exp) after rescaling to [0, 1].
double piece_partial_mass(const DensityPiece& p, double x) {
    const double w = p.hi - p.lo;
    if (x <= p.lo) return 0.0;
    const double z = std::min(1.0, (x - p.lo) / w);
    const double full =
        p.scale * std::pow(w, p.left_exp + p.right_exp - 1.0) *
        std::exp(log_beta(p.left_exp, p.right_exp));
    return full * reg_inc_beta(z, p.left_exp, p.right_exp);
}

}  // namespace

double beta_pdf(double x, const BetaDensity& d) {
    check_unit_interval(x, "beta_pdf");
    // 0^0 = 1 keeps the uniform and one-sided cases exact at the endpoints.
    const double num = pow0(x, d.a1 - 1.0) * pow0(1.0 - x, d.a2 - 1.0);
    return num * std::exp(-log_beta(d.a1, d.a2));
}

double beta_cdf(double x, const BetaDensity& d) {
    check_unit_interval(x, "beta_cdf");
    return reg_inc_beta(x, d.a1, d.a2);
}

double singular_pdf(double x, const SingularityDensitySpec& d) {
    check_unit_interval(x, "singular_pdf");
    for (const auto& p : d.pieces) {
        if (x >= p.lo && x <= p.hi) {
            // Shared boundaries evaluate through the first owning piece.
            return p.scale * pow0(x - p.lo, p.left_exp - 1.0) *
                   pow0(p.hi - x, p.right_exp - 1.0);
        }
    }
    return 0.0;
}

double singular_cdf(double x, const SingularityDensitySpec& d) {
    check_unit_interval(x, "singular_cdf");
    double acc = 0.0;
    for (const auto& p : d.pieces) acc += piece_partial_mass(p, x);
    return std::min(acc, 1.0);
}

double pdf(const DensityModel& d, double x) {
    return std::visit(
        [x](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BetaDensity>) return beta_pdf(x, m);
            else return singular_pdf(x, m);
        },
        d);
}

double cdf(const DensityModel& d, double x) {
    return std::visit(
        [x](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BetaDensity>) return beta_cdf(x, m);
            else return singular_cdf(x, m);
        },
        d);
}

double interval_mass(const DensityModel& d, double lo, double hi) {
    lo = std::clamp(lo, 0.0, 1.0);
    hi = std::clamp(hi, 0.0, 1.0);
    if (lo >= hi) return 0.0;
    return std::max(0.0, cdf(d, hi) - cdf(d, lo));
}

namespace {

std::vector<double> sample_beta(const BetaDensity& d, std::size_t count, Rng& rng) {
    std::vector<double> out;
    out.reserve(count);
    if (d.a2 == 1.0) {
        for (std::size_t i = 0; i < count; ++i)
            out.push_back(std::pow(rng.uniform(), 1.0 / d.a1));
        return out;
    }
    if (d.a1 == 1.0) {
        for (std::size_t i = 0; i < count; ++i)
            out.push_back(1.0 - std::pow(rng.uniform(), 1.0 / d.a2));
        return out;
    }
    for (std::size_t i = 0; i < count; ++i) {
        const double g1 = rng.gamma(d.a1);
        const double g2 = rng.gamma(d.a2);
        out.push_back(g1 / (g1 + g2));
    }
    return out;
}

// Monotone cubic (Fritsch-Carlson) interpolant through (u_k, x_k).
class MonotoneCubic {
public:
    MonotoneCubic(std::vector<double> u, std::vector<double> x)
        : u_(std::move(u)), x_(std::move(x)) {
        const std::size_t n = u_.size();
        slopes_.assign(n, 0.0);
        std::vector<double> secant(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
            secant[i] = (x_[i + 1] - x_[i]) / (u_[i + 1] - u_[i]);
        slopes_[0] = secant.front();
        slopes_[n - 1] = secant.back();
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (secant[i - 1] * secant[i] <= 0.0) {
                slopes_[i] = 0.0;
            } else {
                const double w1 = 2.0 * (u_[i + 1] - u_[i]) + (u_[i] - u_[i - 1]);
                const double w2 = (u_[i + 1] - u_[i]) + 2.0 * (u_[i] - u_[i - 1]);
                slopes_[i] = (w1 + w2) / (w1 / secant[i - 1] + w2 / secant[i]);
            }
        }
    }

    double operator()(double u) const {
        if (u <= u_.front()) return x_.front();
        if (u >= u_.back()) return x_.back();
        const auto it = std::upper_bound(u_.begin(), u_.end(), u);
        const std::size_t i = static_cast<std::size_t>(it - u_.begin()) - 1;
        const double h = u_[i + 1] - u_[i];
        const double t = (u - u_[i]) / h;
        const double t2 = t * t;
        const double t3 = t2 * t;
        const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        const double h10 = t3 - 2.0 * t2 + t;
        const double h01 = -2.0 * t3 + 3.0 * t2;
        const double h11 = t3 - t2;
        return h00 * x_[i] + h10 * h * slopes_[i] + h01 * x_[i + 1] +
               h11 * h * slopes_[i + 1];
    }

private:
    std::vector<double> u_, x_, slopes_;
};

constexpr int kInverseTableKnots = 1 << 14;

std::vector<double> sample_singular(const SingularityDensitySpec& d,
                                    std::size_t count, Rng& rng) {
    // Tabulate the CDF on an even x grid, then interpolate x as a monotone
    // cubic function of u. Flat CDF stretches (zero-density gaps) are
    // collapsed so the knot sequence stays strictly increasing.
    std::vector<double> us, xs;
    us.reserve(kInverseTableKnots + 1);
    xs.reserve(kInverseTableKnots + 1);
    for (int k = 0; k <= kInverseTableKnots; ++k) {
        const double x = static_cast<double>(k) / kInverseTableKnots;
        const double u = singular_cdf(x, d);
        if (!us.empty() && u <= us.back()) continue;
        us.push_back(u);
        xs.push_back(x);
    }
    if (us.size() < 2)
        throw std::runtime_error("sample: degenerate singularity-spec CDF table");
    MonotoneCubic inverse(std::move(us), std::move(xs));

    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(inverse(rng.uniform()));
    return out;
}

}  // namespace

std::vector<double> sample(const DensityModel& d, std::size_t count, Rng& rng) {
    return std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, BetaDensity>)
                return sample_beta(m, count, rng);
            else
                return sample_singular(m, count, rng);
        },
        d);
}

double total_mass(const DensityModel& d) {
    // Integrand may be unbounded at 0/1 for Beta shapes below 1; nudge the
    // endpoints and add the leading-order tail mass.
    if (const auto* b = std::get_if<BetaDensity>(&d)) {
        const double eps = 1e-12;
        const double body = adaptive_simpson(
            [&](double x) { return beta_pdf(x, *b); }, eps, 1.0 - eps, 1e-12);
        const double inv_beta = std::exp(-log_beta(b->a1, b->a2));
        const double tails =
            inv_beta * (std::pow(eps, b->a1) / b->a1 + std::pow(eps, b->a2) / b->a2);
        return body + tails;
    }
    return adaptive_simpson([&](double x) { return pdf(d, x); }, 0.0, 1.0, 1e-10);
}

namespace {

void add_failure(ValidationReport& report, const std::string& condition,
                 const std::string& detail) {
    report.pass = false;
    report.failures.push_back({condition, detail});
}

}  // namespace

ValidationReport validate_spec(const SingularityDensitySpec& d) {
    ValidationReport report;

    if (d.points.empty())
        add_failure(report, "points-nonempty", "no singular points declared");

    for (std::size_t j = 0; j < d.points.size(); ++j) {
        const auto& pt = d.points[j];
        if (pt.s < 0.0 || pt.s > 1.0) {
            add_failure(report, "points-in-unit-interval",
                        "s_" + std::to_string(j + 1) + " outside [0, 1]");
        }
        if (j > 0 && !(d.points[j - 1].s < pt.s)) {
            add_failure(report, "points-strictly-increasing",
                        "s_" + std::to_string(j + 1) + " not above its predecessor");
        }
    }

    if (!(d.delta > 0.0)) {
        add_failure(report, "disjointness", "delta must be positive");
    } else {
        for (std::size_t j = 0; j + 1 < d.points.size(); ++j) {
            if (d.points[j].s + d.delta > d.points[j + 1].s - d.delta) {
                add_failure(report, "disjointness",
                            "delta neighborhoods of s_" + std::to_string(j + 1) +
                                " and s_" + std::to_string(j + 2) + " overlap");
            }
        }
    }

    for (std::size_t j = 0; j < d.points.size(); ++j) {
        const auto& pt = d.points[j];
        double max_order = 0.0;
        bool any_side = false;
        for (const auto& side : {pt.left_order, pt.right_order}) {
            if (!side) continue;
            any_side = true;
            max_order = std::max(max_order, *side);
            if (*side < 1.0) {
                add_failure(report, "order-at-least-one",
                            "side order " + std::to_string(*side) + " at s_" +
                                std::to_string(j + 1) + " below 1");
            }
        }
        if (d.role == PopulationRole::source && any_side && !(max_order > 1.0)) {
            add_failure(report, "source-max-order-above-one",
                        "both side orders at s_" + std::to_string(j + 1) +
                            " equal 1 for a source density");
        }
    }

    // Envelope bounds away from the singular neighborhoods, spot-checked on a
    // 10^3-point grid.
    constexpr int kGrid = 1000;
    for (int k = 0; k <= kGrid; ++k) {
        const double x = static_cast<double>(k) / kGrid;
        bool near_singularity = false;
        for (const auto& pt : d.points)
            if (std::fabs(x - pt.s) < d.delta) near_singularity = true;
        if (near_singularity) continue;
        const double value = singular_pdf(x, d);
        if (value < d.c_lower || value > d.c_upper) {
            std::ostringstream msg;
            msg << "pdf(" << x << ") = " << value << " outside [" << d.c_lower
                << ", " << d.c_upper << "]";
            add_failure(report, "envelope-bounds", msg.str());
            break;
        }
    }

    const double mass = total_mass(DensityModel{d});
    if (std::fabs(mass - 1.0) > 1e-6) {
        add_failure(report, "unit-mass",
                    "total mass " + std::to_string(mass) + " differs from 1");
    }

    return report;
}

}  // namespace slp
