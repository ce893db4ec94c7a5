#include "slp/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slp {

namespace {

std::string format_real(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.12g", v);
    return buffer;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::string csv_to_string(const std::vector<std::string>& header,
                          const std::vector<CsvRow>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(header[i]);
    }
    out += '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("emit_csv: row width differs from header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            std::visit(
                [&out](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::int64_t>)
                        out += std::to_string(v);
                    else if constexpr (std::is_same_v<T, double>)
                        out += format_real(v);
                    else
                        out += csv_escape(v);
                },
                row[i]);
        }
        out += '\n';
    }
    return out;
}

void emit_csv(const std::string& path, const std::vector<std::string>& header,
              const std::vector<CsvRow>& rows) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("emit_csv: cannot open " + path);
    file << csv_to_string(header, rows);
    if (!file) throw std::runtime_error("emit_csv: write failed for " + path);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("read_csv: cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(file, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    field += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else {
                field += c;
            }
        }
        fields.push_back(std::move(field));
        rows.push_back(std::move(fields));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

constexpr int kWidth = 760;
constexpr int kHeight = 520;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 170;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

const char* kPalette[] = {"#e08214", "#d7191c", "#2c7bb6", "#1a1a1a",
                          "#5e3c99", "#008837"};

std::string xml_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string plot_to_string(const std::vector<PlotSeries>& series,
                           const std::string& title) {
    if (series.empty()) throw std::invalid_argument("emit_plot: no series");

    double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
    bool first = true;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (!(x > 0.0))
                throw std::invalid_argument(
                    "emit_plot: x values must be positive on a log axis");
            const double lx = std::log10(x);
            if (first) {
                x_min = x_max = lx;
                y_min = y_max = y;
                first = false;
            } else {
                x_min = std::min(x_min, lx);
                x_max = std::max(x_max, lx);
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
        }
    }
    if (first) throw std::invalid_argument("emit_plot: no points");
    if (x_max - x_min < 1e-12) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_max - y_min < 1e-12) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double y_pad = 0.06 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const auto px = [&](double log_x) {
        return kMarginLeft + plot_w * (log_x - x_min) / (x_max - x_min);
    };
    const auto py = [&](double y) {
        return kMarginTop + plot_h * (y_max - y) / (y_max - y_min);
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           std::to_string(kWidth) + "\" height=\"" + std::to_string(kHeight) +
           "\" viewBox=\"0 0 " + std::to_string(kWidth) + " " +
           std::to_string(kHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + format_real(kMarginLeft + plot_w / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"15\">" +
           xml_escape(title) + "</text>\n";

    // Axes box.
    svg += "<rect x=\"" + std::to_string(kMarginLeft) + "\" y=\"" +
           std::to_string(kMarginTop) + "\" width=\"" + format_real(plot_w) +
           "\" height=\"" + format_real(plot_h) +
           "\" fill=\"none\" stroke=\"#444444\"/>\n";

    // Decade ticks on the log x axis, with one midpoint subdivision when the
    // span is short.
    const int dec_lo = static_cast<int>(std::floor(x_min - 1e-9));
    const int dec_hi = static_cast<int>(std::ceil(x_max + 1e-9));
    for (int d = dec_lo; d <= dec_hi; ++d) {
        for (const double frac : {1.0, 3.0}) {
            const double lx = d + std::log10(frac);
            if (lx < x_min - 1e-9 || lx > x_max + 1e-9) continue;
            const double x_pix = px(lx);
            svg += "<line x1=\"" + format_real(x_pix) + "\" y1=\"" +
                   format_real(kMarginTop + plot_h) + "\" x2=\"" +
                   format_real(x_pix) + "\" y2=\"" +
                   format_real(kMarginTop + plot_h + 6) +
                   "\" stroke=\"#444444\"/>\n";
            std::ostringstream label;
            label << (frac == 1.0 ? "1e" : "3e") << d;
            svg += "<text x=\"" + format_real(x_pix) + "\" y=\"" +
                   format_real(kMarginTop + plot_h + 22) +
                   "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                   "font-size=\"12\">" +
                   label.str() + "</text>\n";
        }
    }
    svg += "<text x=\"" + format_real(kMarginLeft + plot_w / 2) + "\" y=\"" +
           format_real(kHeight - 12.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\">n (log scale)</text>\n";

    // Five y ticks.
    for (int k = 0; k <= 4; ++k) {
        const double y = y_min + (y_max - y_min) * k / 4.0;
        const double y_pix = py(y);
        svg += "<line x1=\"" + format_real(kMarginLeft - 6.0) + "\" y1=\"" +
               format_real(y_pix) + "\" x2=\"" + std::to_string(kMarginLeft) +
               "\" y2=\"" + format_real(y_pix) + "\" stroke=\"#444444\"/>\n";
        svg += "<text x=\"" + format_real(kMarginLeft - 10.0) + "\" y=\"" +
               format_real(y_pix + 4.0) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"12\">" +
               format_real(std::round(y * 1e4) / 1e4) + "</text>\n";
    }
    svg += "<text transform=\"translate(18," +
           format_real(kMarginTop + plot_h / 2) +
           ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\">log SAR</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof kPalette / sizeof *kPalette)];
        std::string pts;
        for (const auto& [x, y] : series[s].points) {
            if (!pts.empty()) pts += ' ';
            pts += format_real(px(std::log10(x))) + "," + format_real(py(y));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.8\" points=\"" + pts + "\"/>\n";
        const double ly = kMarginTop + 18.0 + 20.0 * static_cast<double>(s);
        const double lx = kMarginLeft + plot_w + 14.0;
        svg += "<line x1=\"" + format_real(lx) + "\" y1=\"" + format_real(ly) +
               "\" x2=\"" + format_real(lx + 24.0) + "\" y2=\"" +
               format_real(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"1.8\"/>\n";
        svg += "<text x=\"" + format_real(lx + 30.0) + "\" y=\"" +
               format_real(ly + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" +
               xml_escape(series[s].label) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void emit_plot(const std::vector<PlotSeries>& series, const std::string& title,
               const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("emit_plot: cannot open " + path);
    file << plot_to_string(series, title);
    if (!file) throw std::runtime_error("emit_plot: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": empty section name");
            if (!cfg.data_.count(section)) cfg.section_order_.push_back(section);
            cfg.data_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": empty key");
        if (!cfg.data_.count(section) && !section.empty())
            cfg.section_order_.push_back(section);
        auto& sec = cfg.data_[section];
        if (sec.count(key))
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": duplicate key '" + key + "'");
        sec[key] = Entry{value, line_no, false};
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("cannot open config file " + path);
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return parse(buffer.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto sec = data_.find(section);
    return sec != data_.end() && sec->second.count(key) > 0;
}

std::optional<std::string> Config::raw(const std::string& section,
                                       const std::string& key) const {
    const auto sec = data_.find(section);
    if (sec == data_.end()) return std::nullopt;
    const auto entry = sec->second.find(key);
    if (entry == sec->second.end()) return std::nullopt;
    entry->second.consumed = true;
    return entry->second.value;
}

double Config::get_real(const std::string& section, const std::string& key,
                        double fallback) const {
    const auto value = raw(section, key);
    if (!value) return fallback;
    try {
        std::size_t used = 0;
        const double parsed = std::stod(*value, &used);
        if (used != value->size()) throw std::invalid_argument("trailing text");
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + section + "." + key +
                          "': not a number: " + *value);
    }
}

std::int64_t Config::get_int(const std::string& section, const std::string& key,
                             std::int64_t fallback) const {
    const auto value = raw(section, key);
    if (!value) return fallback;
    try {
        std::size_t used = 0;
        const long long parsed = std::stoll(*value, &used);
        if (used != value->size()) throw std::invalid_argument("trailing text");
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + section + "." + key +
                          "': not an integer: " + *value);
    }
}

std::string Config::get_string(const std::string& section,
                               const std::string& key,
                               const std::string& fallback) const {
    const auto value = raw(section, key);
    return value ? *value : fallback;
}

std::vector<double> Config::get_real_list(
    const std::string& section, const std::string& key,
    const std::vector<double>& fallback) const {
    const auto value = raw(section, key);
    if (!value) return fallback;
    std::vector<double> out;
    std::string token;
    std::istringstream in(*value);
    while (std::getline(in, token, ',')) {
        token = trim(token);
        if (token.empty())
            throw ConfigError("config key '" + section + "." + key +
                              "': empty list element");
        try {
            std::size_t used = 0;
            out.push_back(std::stod(token, &used));
            if (used != token.size()) throw std::invalid_argument("trailing text");
        } catch (const std::exception&) {
            throw ConfigError("config key '" + section + "." + key +
                              "': not a number: " + token);
        }
    }
    if (out.empty())
        throw ConfigError("config key '" + section + "." + key + "': empty list");
    return out;
}

void Config::skip_section(const std::string& section) const {
    const auto sec = data_.find(section);
    if (sec == data_.end()) return;
    for (const auto& [key, entry] : sec->second) entry.consumed = true;
}

void Config::reject_unknown_keys() const {
    for (const auto& [section, entries] : data_) {
        for (const auto& [key, entry] : entries) {
            if (!entry.consumed)
                throw ConfigError("unknown config key '" + section + "." + key +
                                  "' (line " + std::to_string(entry.line) + ")");
        }
    }
}

}  // namespace slp
