// slp: spread-function transfer learning toolkit.
//
// Subcommands: spread, estimate, rate, adapt, simulate. Configuration comes
// from a flat sectioned key = value file; unknown keys are rejected. Exit
// codes: 0 success, 2 configuration error, 3 numeric failure.

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slp/adapt.hpp"
#include "slp/densities.hpp"
#include "slp/estimators.hpp"
#include "slp/io.hpp"
#include "slp/rates.hpp"
#include "slp/simharness.hpp"
#include "slp/spread.hpp"

namespace {

using namespace slp;

struct GlobalOptions {
    std::string config_path;
    std::string output_dir = ".";
    std::optional<std::int64_t> seed_flag;
    std::string preset = "desk";
    int threads = 0;
};

Config load_config(const GlobalOptions& opts) {
    if (opts.config_path.empty()) return Config::parse("");
    return Config::load(opts.config_path);
}

// flag > SLP_SEED env var > config file.
std::uint64_t resolve_seed(const GlobalOptions& opts, const Config& cfg,
                           const std::string& section,
                           std::uint64_t fallback) {
    const std::int64_t from_cfg =
        cfg.get_int(section, "seed", static_cast<std::int64_t>(fallback));
    std::int64_t seed = from_cfg;
    if (const char* env = std::getenv("SLP_SEED")) {
        try {
            seed = std::stoll(env);
        } catch (const std::exception&) {
            throw ConfigError("SLP_SEED is not an integer: " + std::string(env));
        }
    }
    if (opts.seed_flag) seed = *opts.seed_flag;
    return static_cast<std::uint64_t>(seed);
}

std::string out_path(const GlobalOptions& opts, const std::string& name) {
    std::filesystem::create_directories(opts.output_dir);
    return (std::filesystem::path(opts.output_dir) / name).string();
}

double require_positive(double v, const std::string& key) {
    if (!(v > 0.0)) throw ConfigError("config key '" + key + "' must be positive");
    return v;
}

// One config file serves every subcommand; sections owned by the others are
// skipped before the unknown-key check.
void finish_config(const Config& cfg, std::initializer_list<const char*> used) {
    const char* all[] = {"spread", "estimate", "rate",
                         "adapt",  "simulate", "source", "target"};
    for (const char* section : all) {
        bool is_used = false;
        for (const char* u : used)
            if (std::string(section) == u) is_used = true;
        if (!is_used) cfg.skip_section(section);
    }
    cfg.reject_unknown_keys();
}

// --------------------------------------------------------------------------
// Density sections: kind = beta | singular, with piece.N / point.N lists for
// the singular kind.
// --------------------------------------------------------------------------

DensityModel parse_density(const Config& cfg, const std::string& section,
                           PopulationRole default_role) {
    const std::string kind = cfg.get_string(section, "kind", "beta");
    if (kind == "beta") {
        const double a1 = require_positive(cfg.get_real(section, "a1", 1.0),
                                           section + ".a1");
        const double a2 = require_positive(cfg.get_real(section, "a2", 1.0),
                                           section + ".a2");
        return BetaDensity{a1, a2};
    }
    if (kind != "singular")
        throw ConfigError("config key '" + section +
                          ".kind' must be beta or singular");

    SingularityDensitySpec spec;
    const std::string role =
        cfg.get_string(section, "role",
                       default_role == PopulationRole::source ? "source"
                                                              : "target");
    if (role == "source") spec.role = PopulationRole::source;
    else if (role == "target") spec.role = PopulationRole::target;
    else throw ConfigError("config key '" + section + ".role' must be source or target");

    spec.delta = require_positive(cfg.get_real(section, "delta", 0.05),
                                  section + ".delta");
    spec.c_lower = require_positive(cfg.get_real(section, "c_lower", 1e-3),
                                    section + ".c_lower");
    spec.c_upper = require_positive(cfg.get_real(section, "c_upper", 1e3),
                                    section + ".c_upper");

    for (int k = 1;; ++k) {
        const std::string key = "piece." + std::to_string(k);
        if (!cfg.has(section, key)) break;
        const auto v = cfg.get_real_list(section, key, {});
        if (v.size() != 5)
            throw ConfigError("config key '" + section + "." + key +
                              "': expected lo, hi, scale, left_exp, right_exp");
        spec.pieces.push_back({v[0], v[1], v[2], v[3], v[4]});
    }
    for (int k = 1;; ++k) {
        const std::string key = "point." + std::to_string(k);
        if (!cfg.has(section, key)) break;
        std::istringstream in(*cfg.raw(section, key));
        std::string token;
        std::vector<std::string> fields;
        while (std::getline(in, token, ',')) fields.push_back(token);
        if (fields.size() != 3)
            throw ConfigError("config key '" + section + "." + key +
                              "': expected s, left_order, right_order ('-' if absent)");
        const auto side = [&](const std::string& raw_text) -> std::optional<double> {
            std::string t;
            for (const char c : raw_text)
                if (!std::isspace(static_cast<unsigned char>(c))) t += c;
            if (t == "-" || t.empty()) return std::nullopt;
            try {
                return std::stod(t);
            } catch (const std::exception&) {
                throw ConfigError("config key '" + section + "." + key +
                                  "': bad side order: " + raw_text);
            }
        };
        SingularPoint pt;
        try {
            pt.s = std::stod(fields[0]);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + section + "." + key +
                              "': bad point location");
        }
        pt.left_order = side(fields[1]);
        pt.right_order = side(fields[2]);
        spec.points.push_back(pt);
    }
    if (spec.pieces.empty())
        throw ConfigError("config section [" + section +
                          "]: singular density needs at least one piece");

    const ValidationReport report = validate_spec(spec);
    if (!report.pass)
        throw ConfigError("density [" + section + "] fails validation: " +
                          report.first_violation());
    return spec;
}

Sample read_sample(const std::string& path) {
    const auto rows = read_csv(path);
    if (rows.empty() || rows[0].size() < 3 || rows[0][0] != "x")
        throw ConfigError("sample file " + path +
                          ": expected header x,y,origin");
    Sample out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != 3)
            throw ConfigError("sample file " + path + ": bad row " +
                              std::to_string(i + 1));
        Observation obs;
        try {
            obs.x = std::stod(rows[i][0]);
            obs.y = std::stod(rows[i][1]);
        } catch (const std::exception&) {
            throw ConfigError("sample file " + path + ": bad number in row " +
                              std::to_string(i + 1));
        }
        if (rows[i][2] == "source") obs.origin = Origin::source;
        else if (rows[i][2] == "target") obs.origin = Origin::target;
        else throw ConfigError("sample file " + path + ": origin must be source or target");
        out.push_back(obs);
    }
    return out;
}

// --------------------------------------------------------------------------
// Subcommands
// --------------------------------------------------------------------------

int cmd_spread(const GlobalOptions& opts, int x_grid) {
    const Config cfg = load_config(opts);
    const auto n = cfg.get_int("spread", "n", 10000);
    const auto n_T = cfg.get_int("spread", "n_T", 0);
    const double beta =
        require_positive(cfg.get_real("spread", "beta", 0.5), "spread.beta");
    const DensityModel source = parse_density(cfg, "source", PopulationRole::source);
    const DensityModel target = parse_density(cfg, "target", PopulationRole::target);
    finish_config(cfg, {"spread", "source", "target"});

    SpreadContext ctx(n, n_T, beta, source, target);
    std::vector<CsvRow> rows;
    for (int i = 0; i <= x_grid; ++i) {
        const double x = static_cast<double>(i) / x_grid;
        rows.push_back({x, solve_spread(ctx, x)});
    }
    const std::string path = out_path(opts, "spread.csv");
    emit_csv(path, {"x", "t_n"}, rows);
    std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
    return 0;
}

int cmd_estimate(const GlobalOptions& opts, const std::string& input) {
    const Config cfg = load_config(opts);
    const double beta =
        require_positive(cfg.get_real("estimate", "beta", 0.5), "estimate.beta");
    const double kappa =
        require_positive(cfg.get_real("estimate", "kappa", 0.2), "estimate.kappa");
    const double sigma_bar = require_positive(
        cfg.get_real("estimate", "sigma_bar", 0.3), "estimate.sigma_bar");
    EstimatorConfig est = EstimatorConfig::with_defaults(beta, kappa, sigma_bar);
    est.c_bandwidth = require_positive(cfg.get_real("estimate", "c", 0.7),
                                       "estimate.c");
    est.order_l = static_cast<int>(cfg.get_int("estimate", "order_l", est.order_l));
    est.T1 = require_positive(cfg.get_real("estimate", "T1", est.T1), "estimate.T1");
    est.T0 = require_positive(cfg.get_real("estimate", "T0", 2.0 * est.T1),
                              "estimate.T0");
    const std::string mode_name =
        cfg.get_string("estimate", "mode", "pooled");
    FitMode mode;
    if (mode_name == "pooled") mode = FitMode::pooled;
    else if (mode_name == "source_only") mode = FitMode::source_only;
    else if (mode_name == "target_only") mode = FitMode::target_only;
    else throw ConfigError("config key 'estimate.mode' must be pooled, source_only or target_only");
    const auto grid_n = cfg.get_int("estimate", "grid_n", 200);
    if (grid_n < 1) throw ConfigError("config key 'estimate.grid_n' must be >= 1");
    const DensityModel source = parse_density(cfg, "source", PopulationRole::source);
    const DensityModel target = parse_density(cfg, "target", PopulationRole::target);
    finish_config(cfg, {"estimate", "source", "target"});

    const Sample sample = read_sample(input);
    SpreadContext ctx(static_cast<std::int64_t>(sample.n),
                      static_cast<std::int64_t>(sample.n_T), beta, source,
                      target);
    std::vector<double> grid;
    for (std::int64_t i = 1; i <= grid_n; ++i)
        grid.push_back(static_cast<double>(i) / static_cast<double>(grid_n));
    const auto fitted = fit_curve(grid, sample, ctx, est, mode);

    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < grid.size(); ++i)
        rows.push_back({grid[i], fitted[i]});
    const std::string path = out_path(opts, "fitted.csv");
    emit_csv(path, {"x", "fhat"}, rows);
    std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
    return 0;
}

void print_rate(const RateResult& r, double sar_value) {
    std::cout << "region = " << to_string(r.region) << "\n";
    if (r.symbolic.pooled) {
        std::cout << "rate = (n + n_T)^-" << r.symbolic.pooled_exp << "\n";
    } else {
        std::cout << "rate =";
        bool first = true;
        const auto factor = [&](const std::string& text) {
            std::cout << (first ? " " : " * ") << text;
            first = false;
        };
        std::ostringstream term;
        if (r.symbolic.p != 0.0) {
            term << "n^-" << r.symbolic.p;
            factor(term.str());
        }
        if (r.symbolic.q != 0.0) {
            term.str({});
            term << "n_T^-" << r.symbolic.q;
            factor(term.str());
        }
        if (r.symbolic.r != 0.0) {
            term.str({});
            term << "(n_T/n)^" << r.symbolic.r;
            factor(term.str());
        }
        if (first) std::cout << " 1";
        std::cout << "\n";
    }
    std::cout << "rate_value = " << r.rate_value << "\n";
    std::cout << "sar = " << sar_value << "\n";
    std::cout << "slp = " << (r.slp ? "yes" : "no") << "\n";
    if (r.log_factor) std::cout << "log_factor = yes\n";
}

int cmd_rate(const GlobalOptions& opts, bool sweep) {
    const Config cfg = load_config(opts);
    const double beta =
        require_positive(cfg.get_real("rate", "beta", 0.5), "rate.beta");
    const bool general = cfg.get_string("source", "kind", "beta") == "singular";

    std::optional<SingularityDensitySpec> src_spec, tgt_spec;
    double a = 4.0;
    if (general) {
        src_spec = std::get<SingularityDensitySpec>(
            parse_density(cfg, "source", PopulationRole::source));
        tgt_spec = std::get<SingularityDensitySpec>(
            parse_density(cfg, "target", PopulationRole::target));
    } else {
        a = require_positive(cfg.get_real("rate", "a", 4.0), "rate.a");
    }
    const auto compute = [&](double n, double n_T) {
        return general ? general_tlr(n, n_T, *src_spec, *tgt_spec, beta)
                       : tlr(n, n_T, a, beta);
    };
    const auto sar_of = [&](double n, double n_T) -> double {
        if (!general) return sar(n, n_T, a, beta);
        // acceleration by definition: better individual rate / joint rate
        const double joint = compute(n, n_T).rate_value;
        double best = std::numeric_limits<double>::infinity();
        if (n >= 1.0) best = std::min(best, compute(n, 0.0).rate_value);
        if (n_T >= 1.0) best = std::min(best, compute(0.0, n_T).rate_value);
        return best / joint;
    };

    if (!sweep) {
        const double n = static_cast<double>(cfg.get_int("rate", "n", 100000));
        const double n_T = static_cast<double>(cfg.get_int("rate", "n_T", 1000));
        if (general) finish_config(cfg, {"rate", "source", "target"});
        else finish_config(cfg, {"rate"});
        print_rate(compute(n, n_T), sar_of(n, n_T));
        return 0;
    }

    // n and n_T belong to the single-point mode; accept them in a shared file
    cfg.get_int("rate", "n", 0);
    cfg.get_int("rate", "n_T", 0);
    const auto n_list = cfg.get_real_list("rate", "n_list",
                                          {1e3, 1e4, 1e5, 1e6});
    const auto nt_list = cfg.get_real_list("rate", "nt_list",
                                           {1e1, 1e2, 1e3, 1e4, 1e5});
    if (general) finish_config(cfg, {"rate", "source", "target"});
    else finish_config(cfg, {"rate"});
    std::vector<CsvRow> rows;
    for (const double n : n_list) {
        for (const double n_T : nt_list) {
            const RateResult r = compute(n, n_T);
            rows.push_back({n, n_T, to_string(r.region), r.rate_value,
                            sar_of(n, n_T),
                            static_cast<std::int64_t>(r.slp ? 1 : 0)});
        }
    }
    const std::string path = out_path(opts, "rate_sweep.csv");
    emit_csv(path, {"n", "n_T", "region", "rate", "sar", "slp"}, rows);
    std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
    return 0;
}

int cmd_adapt(const GlobalOptions& opts, const std::string& input) {
    const Config cfg = load_config(opts);
    const double a_lo =
        require_positive(cfg.get_real("adapt", "a_lo", 0.5), "adapt.a_lo");
    const double a_hi =
        require_positive(cfg.get_real("adapt", "a_hi", 10.0), "adapt.a_hi");
    const double kappa =
        require_positive(cfg.get_real("adapt", "kappa", 0.2), "adapt.kappa");
    LepskiConfig lepski = LepskiConfig::with_defaults(
        require_positive(cfg.get_real("adapt", "beta_lo", 0.2), "adapt.beta_lo"),
        require_positive(cfg.get_real("adapt", "beta_hi", 2.0), "adapt.beta_hi"),
        kappa);
    lepski.trim = cfg.get_real("adapt", "trim", lepski.trim);
    lepski.c_sel = cfg.get_real("adapt", "c_sel", lepski.c_sel);
    lepski.c_shrink = cfg.get_real("adapt", "c_shrink", lepski.c_shrink);
    lepski.eval_grid_size = static_cast<int>(
        cfg.get_int("adapt", "eval_grid_size", lepski.eval_grid_size));
    lepski.validate();
    finish_config(cfg, {"adapt"});

    const Sample sample = read_sample(input);
    const auto halves = split_halves(sample);
    const auto xs_of = [](const Sample& s, Origin which) {
        std::vector<double> xs;
        for (const auto& row : s.rows)
            if (row.origin == which) xs.push_back(row.x);
        return xs;
    };
    const auto src_xs = xs_of(halves.first, Origin::source);
    const auto tgt_xs = xs_of(halves.first, Origin::target);
    const BetaMleResult src =
        src_xs.size() >= 2 ? beta_mle(src_xs, a_lo, a_hi) : BetaMleResult{};
    const BetaMleResult tgt =
        tgt_xs.size() >= 2 ? beta_mle(tgt_xs, a_lo, a_hi) : BetaMleResult{};
    const LepskiResult smoothness = lepski_beta(pick_lepski_half(sample), lepski);

    std::cout << "source.a1 = " << src.a1 << "\n"
              << "source.a2 = " << src.a2 << "\n"
              << "target.a1 = " << tgt.a1 << "\n"
              << "target.a2 = " << tgt.a2 << "\n"
              << "beta_hat = " << smoothness.beta_hat << "\n"
              << "tau_hat = " << smoothness.tau_hat << "\n";

    const std::string path = out_path(opts, "adapt.csv");
    emit_csv(path,
             {"a1_source", "a2_source", "a1_target", "a2_target", "beta_hat"},
             {{src.a1, src.a2, tgt.a1, tgt.a2, smoothness.beta_hat}});
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_simulate(const GlobalOptions& opts) {
    const Config cfg = load_config(opts);

    ExperimentConfig base;
    if (opts.preset == "desk") {
        base.n_list = {3000, 5000, 10000, 30000};
        base.replications = 25;
    } else if (opts.preset == "paper") {
        base.n_list = {3000, 5000, 10000, 30000, 50000, 100000};
        base.replications = 100;
    } else {
        throw ConfigError("preset must be desk or paper");
    }

    base.a = require_positive(cfg.get_real("simulate", "a", base.a), "simulate.a");
    base.beta = require_positive(cfg.get_real("simulate", "beta", base.beta),
                                 "simulate.beta");
    base.sigma = cfg.get_real("simulate", "sigma", base.sigma);
    if (!(base.sigma >= 0.0)) throw ConfigError("config key 'simulate.sigma' must be >= 0");
    base.c_bandwidth = require_positive(
        cfg.get_real("simulate", "c", base.c_bandwidth), "simulate.c");
    base.grid_N =
        static_cast<int>(cfg.get_int("simulate", "grid_n", base.grid_N));
    if (base.grid_N < 1) throw ConfigError("config key 'simulate.grid_n' must be >= 1");
    base.replications = static_cast<int>(
        cfg.get_int("simulate", "replications", base.replications));
    if (base.replications < 1)
        throw ConfigError("config key 'simulate.replications' must be >= 1");
    base.c4_sl = cfg.get_real("simulate", "c4_sl", base.c4_sl);
    base.c4_tl = cfg.get_real("simulate", "c4_tl", base.c4_tl);
    const std::string f_name = cfg.get_string("simulate", "f", "f1");
    if (f_name == "f1") base.f_id = TargetFn::f1;
    else if (f_name == "f2") base.f_id = TargetFn::f2;
    else throw ConfigError("config key 'simulate.f' must be f1 or f2");
    const auto n_list = cfg.get_real_list("simulate", "n_list", {});
    if (!n_list.empty()) {
        base.n_list.clear();
        for (const double n : n_list) {
            if (!(n >= 1.0)) throw ConfigError("config key 'simulate.n_list': sizes must be >= 1");
            base.n_list.push_back(static_cast<std::int64_t>(std::llround(n)));
        }
    }
    base.base_seed = resolve_seed(opts, cfg, "simulate", base.base_seed);

    std::vector<double> rules = cfg.get_real_list("simulate", "ssr", {1, 2, 3, 4});
    finish_config(cfg, {"simulate"});

    std::vector<PlotSeries> plot;
    for (const double rule_id : rules) {
        const int r = static_cast<int>(rule_id);
        if (r < 1 || r > 4)
            throw ConfigError("config key 'simulate.ssr': rules are 1..4");
        ExperimentConfig cell_cfg = base;
        cell_cfg.nt_rule = static_cast<NTRule>(r - 1);
        const ExperimentResult result = run_experiment(cell_cfg, opts.threads);

        std::vector<CsvRow> cell_rows;
        for (const auto& c : result.cells)
            cell_rows.push_back({c.n, c.n_T, static_cast<std::int64_t>(c.rep),
                                 c.loss.source_loss, c.loss.target_loss,
                                 c.loss.pooled_loss});
        emit_csv(out_path(opts, "cells_ssr" + std::to_string(r) + ".csv"),
                 {"n", "n_T", "rep", "L_source", "L_target", "L_pool"},
                 cell_rows);

        std::vector<CsvRow> series_rows;
        PlotSeries series{"SSR-" + std::to_string(r), {}};
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : result.series) {
            series_rows.push_back({p.log_n, p.log_sar, to_string(p.region)});
            series.points.emplace_back(static_cast<double>(p.n), p.log_sar);
            pts.emplace_back(p.log_n, p.log_sar);
        }
        emit_csv(out_path(opts, "series_ssr" + std::to_string(r) + ".csv"),
                 {"log_n", "log_sar", "region"}, series_rows);
        plot.push_back(std::move(series));

        const auto [slope, intercept] = fit_slope(pts);
        (void)intercept;
        std::cout << "SSR-" << r << ": slope(log SAR ~ log n) = " << slope
                  << "\n";
    }

    std::ostringstream title;
    title << "log SAR vs n (a = " << base.a << ", beta = " << base.beta << ")";
    emit_plot(plot, title.str(), out_path(opts, "sar_plot.svg"));
    std::cout << "wrote " << out_path(opts, "sar_plot.svg") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spread-function transfer learning toolkit"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "config file (sectioned key = value)");
    app.add_option("--output-dir", opts.output_dir, "output directory")
        ->capture_default_str();
    app.add_option("--seed", opts.seed_flag,
                   "seed override (beats SLP_SEED and the config file)");
    app.add_option("--threads", opts.threads, "worker threads (0 = hardware)");

    int x_grid = 200;
    auto* spread_cmd = app.add_subcommand(
        "spread", "tabulate the spread function over an x grid");
    spread_cmd->add_option("--x-grid", x_grid, "grid resolution")
        ->capture_default_str();

    std::string estimate_input;
    auto* estimate_cmd =
        app.add_subcommand("estimate", "fit a curve from a sample CSV");
    estimate_cmd->add_option("--input", estimate_input, "sample CSV (x,y,origin)")
        ->required();

    bool sweep = false;
    auto* rate_cmd = app.add_subcommand(
        "rate", "print the rate/SAR diagnosis, or sweep a grid");
    rate_cmd->add_flag("--sweep", sweep, "emit a CSV over an (n, n_T) grid");

    std::string adapt_input;
    auto* adapt_cmd = app.add_subcommand(
        "adapt", "estimate density shapes and smoothness from a sample CSV");
    adapt_cmd->add_option("--input", adapt_input, "sample CSV (x,y,origin)")
        ->required();

    auto* simulate_cmd = app.add_subcommand(
        "simulate", "run the Monte Carlo slope experiments");
    simulate_cmd
        ->add_option("--preset", opts.preset, "desk (quick) or paper (full)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (spread_cmd->parsed()) return cmd_spread(opts, x_grid);
        if (estimate_cmd->parsed()) return cmd_estimate(opts, estimate_input);
        if (rate_cmd->parsed()) return cmd_rate(opts, sweep);
        if (adapt_cmd->parsed()) return cmd_adapt(opts, adapt_input);
        if (simulate_cmd->parsed()) return cmd_simulate(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
