#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace slp {

// Config file problems (exit code 2) versus numeric failures (exit code 3).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

using CsvValue = std::variant<std::int64_t, double, std::string>;
using CsvRow = std::vector<CsvValue>;

// RFC-4180-style CSV: header row, LF line endings, reals printed with 12
// significant digits. Deterministic bytes for identical input.
void emit_csv(const std::string& path, const std::vector<std::string>& header,
              const std::vector<CsvRow>& rows);

std::string csv_to_string(const std::vector<std::string>& header,
                          const std::vector<CsvRow>& rows);

// Minimal reader for the x,y,origin sample files consumed by the CLI.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

// ---------------------------------------------------------------------------
// SVG line plot
// ---------------------------------------------------------------------------

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (n, value)
};

// Self-contained single-panel SVG with a log-scaled x axis, ticks, and a
// legend entry per series. Identical input produces identical bytes.
void emit_plot(const std::vector<PlotSeries>& series, const std::string& title,
               const std::string& path);

std::string plot_to_string(const std::vector<PlotSeries>& series,
                           const std::string& title);

// ---------------------------------------------------------------------------
// Flat sectioned key = value config
// ---------------------------------------------------------------------------

class Config {
public:
    // Parses "[section]" headers and "key = value" lines; '#' starts a
    // comment. Malformed lines raise ConfigError with the line number.
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;

    std::optional<std::string> raw(const std::string& section,
                                   const std::string& key) const;

    // Typed getters; a present key that fails to convert or validate raises
    // ConfigError naming the key.
    double get_real(const std::string& section, const std::string& key,
                    double fallback) const;
    std::int64_t get_int(const std::string& section, const std::string& key,
                         std::int64_t fallback) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    std::vector<double> get_real_list(const std::string& section,
                                      const std::string& key,
                                      const std::vector<double>& fallback) const;

    // Every key must be consumed by a getter; leftovers are typos and
    // reported as hard errors.
    void reject_unknown_keys() const;

    // Marks a whole section consumed. Subcommands use this for sections
    // owned by other subcommands so one config file can serve all of them.
    void skip_section(const std::string& section) const;

    const std::vector<std::string>& sections() const { return section_order_; }

private:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };
    std::map<std::string, std::map<std::string, Entry>> data_;
    std::vector<std::string> section_order_;
};

}  // namespace slp
