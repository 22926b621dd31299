#pragma once

// Versioned CSV tables and static SVG plots for the command-line tool.
//
// CSV layout:
//   # dsff-lab v1
//   # config: {...run config json...}
//   col_a,col_b,...
//   rows...

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsff/estimator.hpp"
#include "dsff/theory.hpp"

namespace dsff::io {

inline constexpr std::string_view kCsvVersionLine = "# dsff-lab v1";

class TableFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest representation that round-trips; "nan"/"inf"/"-inf" otherwise.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw TableFormatError("not a number: '" + std::string(s) + "'");
    return v;
}

struct Table {
    nlohmann::json config = nlohmann::json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw TableFormatError("missing column '" + std::string(name) + "'");
        return static_cast<std::size_t>(it - columns.begin());
    }

    bool has_column(std::string_view name) const {
        return std::find(columns.begin(), columns.end(), name) != columns.end();
    }

    double number(std::size_t row, std::string_view name) const { return parse_double(rows.at(row).at(column(name))); }
};

inline void write_csv(std::ostream& out, const Table& table) {
    out << kCsvVersionLine << '\n';
    out << "# config: " << table.config.dump() << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
}

inline std::string to_csv(const Table& table) {
    std::ostringstream os;
    write_csv(os, table);
    return os.str();
}

inline Table read_csv(std::istream& in) {
    Table table;
    std::string line;
    if (!std::getline(in, line) || line != kCsvVersionLine)
        throw TableFormatError("missing or unsupported version line (expected '" + std::string(kCsvVersionLine) + "')");
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# config: ", 0) == 0) {
            table.config = nlohmann::json::parse(line.substr(10), nullptr, false);
            if (table.config.is_discarded()) throw TableFormatError("malformed config line");
            continue;
        }
        if (line[0] == '#') continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!have_header) {
            table.columns = std::move(cells);
            have_header = true;
        } else {
            if (cells.size() != table.columns.size())
                throw TableFormatError("row " + std::to_string(table.rows.size() + 1) + " has " +
                                       std::to_string(cells.size()) + " cells, expected " +
                                       std::to_string(table.columns.size()));
            table.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw TableFormatError("missing column header");
    return table;
}

/// JSON mirror of a table: numeric cells become numbers (non-finite as null).
inline nlohmann::json to_json(const Table& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            try {
                const double v = parse_double(row[i]);
                obj[table.columns[i]] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
            } catch (const TableFormatError&) {
                obj[table.columns[i]] = row[i];
            }
        }
        rows.push_back(std::move(obj));
    }
    return {{"format", std::string(kCsvVersionLine.substr(2))},
            {"config", table.config},
            {"columns", table.columns},
            {"rows", std::move(rows)}};
}

inline const std::vector<std::string>& estimate_columns() {
    static const std::vector<std::string> cols = {
        "theta", "abs_tau",   "t",       "s", "k_mean", "k_stderr", "disconnected_unbiased",
        "connected", "contact", "M", "N", "connected_stderr"};
    return cols;
}

inline Table estimates_table(const std::vector<DsffEstimate>& estimates, double theta, nlohmann::json config) {
    Table table;
    table.config = std::move(config);
    table.columns = estimate_columns();
    for (const auto& e : estimates) {
        table.rows.push_back({format_double(theta), format_double(e.tau.abs_tau()), format_double(e.tau.t),
                              format_double(e.tau.s), format_double(e.k_mean), format_double(e.k_stderr),
                              format_double(e.disconnected_unbiased), format_double(e.connected),
                              format_double(e.contact), std::to_string(e.m), std::to_string(e.n),
                              format_double(e.connected_stderr)});
    }
    return table;
}

inline const std::vector<std::string>& theory_columns() {
    static const std::vector<std::string> cols = {
        "theta",     "abs_tau",    "t",          "s",           "k_total",         "disconnected",
        "connected", "contact",    "e_value",    "v_value",     "e_leading",       "e_laplacian",
        "e_kappa4",  "e_real_axis", "v_gradient", "v_series",   "v_kappa4",        "v_real_ramp",
        "validity_warning", "N"};
    return cols;
}

/// One theory row; quantities the model does not define are NaN.
struct TheoryRow {
    double theta = 0.0;
    ComplexTime tau;
    long n = 0;
    double k_total = std::numeric_limits<double>::quiet_NaN();
    double disconnected = std::numeric_limits<double>::quiet_NaN();
    double connected = std::numeric_limits<double>::quiet_NaN();
    double contact = std::numeric_limits<double>::quiet_NaN();
    std::optional<TheoryPrediction> detail;
    bool validity_warning = false;
};

inline Table theory_table(const std::vector<TheoryRow>& rows, nlohmann::json config) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    Table table;
    table.config = std::move(config);
    table.columns = theory_columns();
    for (const auto& r : rows) {
        const auto* p = r.detail ? &*r.detail : nullptr;
        auto f = [](double v) { return format_double(v); };
        table.rows.push_back({f(r.theta), f(r.tau.abs_tau()), f(r.tau.t), f(r.tau.s), f(r.k_total),
                              f(r.disconnected), f(r.connected), f(r.contact), f(p ? p->e_value : nan),
                              f(p ? p->v_value : nan), f(p ? p->e_terms.leading : nan),
                              f(p ? p->e_terms.laplacian : nan), f(p ? p->e_terms.kappa4 : nan),
                              f(p ? p->e_terms.real_axis : nan), f(p ? p->v_terms.gradient : nan),
                              f(p ? p->v_terms.series : nan), f(p ? p->v_terms.kappa4 : nan),
                              f(p ? p->v_terms.real_ramp : nan), r.validity_warning ? "1" : "0",
                              std::to_string(r.n)});
    }
    return table;
}

// ---------------------------------------------------------------------------
// SVG

struct PlotSeries {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> err;  ///< symmetric error bars; empty for none
    bool markers = false;     ///< points (with error bars) instead of a polyline
};

struct PlotOptions {
    std::string title;
    std::string x_label = "|tau|";
    std::string y_label = "K";
    int width = 800;
    int height = 560;
};

namespace detail {

inline std::string svg_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace detail

/// Static log-log line chart. Non-positive values are skipped.
inline std::string render_loglog_svg(const std::vector<PlotSeries>& series, const PlotOptions& opt) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
    double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!(xmax > 0.0)) xmin = 0.1, xmax = 10.0;
    if (!(ymax > 0.0)) ymin = 1e-3, ymax = 1.0;
    const double lx0 = std::floor(std::log10(xmin)), lx1 = std::max(lx0 + 1.0, std::ceil(std::log10(xmax)));
    const double ly0 = std::floor(std::log10(ymin)), ly1 = std::max(ly0 + 1.0, std::ceil(std::log10(ymax)));

    const double left = 80, right = 20, top = 40, bottom = 60;
    const double pw = opt.width - left - right, ph = opt.height - top - bottom;
    auto px = [&](double x) { return left + (std::log10(x) - lx0) / (lx1 - lx0) * pw; };
    auto py = [&](double y) { return top + (ly1 - std::log10(y)) / (ly1 - ly0) * ph; };
    using detail::num;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << num(opt.width / 2.0) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << detail::svg_escape(opt.title) << "</text>\n";
    svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\""
        << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double d = lx0; d <= lx1 + 1e-9; d += 1.0) {
        const double x = left + (d - lx0) / (lx1 - lx0) * pw;
        svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(top) << "\" x2=\"" << num(x) << "\" y2=\""
            << num(top + ph) << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">1e"
            << static_cast<int>(d) << "</text>\n";
    }
    for (double d = ly0; d <= ly1 + 1e-9; d += 1.0) {
        const double y = top + (ly1 - d) / (ly1 - ly0) * ph;
        svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + pw) << "\" y2=\""
            << num(y) << "\" stroke=\"#ddd\"/>\n";
        svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">1e"
            << static_cast<int>(d) << "</text>\n";
    }
    svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(opt.height - 15.0)
        << "\" text-anchor=\"middle\">" << detail::svg_escape(opt.x_label) << "</text>\n";
    svg << "<text x=\"20\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << num(top + ph / 2) << ")\">" << detail::svg_escape(opt.y_label) << "</text>\n";

    for (const auto& s : series) {
        if (s.markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
                const double cx = px(s.x[i]), cy = py(s.y[i]);
                if (!s.err.empty() && std::isfinite(s.err[i]) && s.err[i] > 0.0) {
                    const double lo = s.y[i] - s.err[i];
                    const double y_lo = lo > 0.0 ? py(lo) : top + ph;
                    const double y_hi = py(s.y[i] + s.err[i]);
                    svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y_lo) << "\" x2=\"" << num(cx)
                        << "\" y2=\"" << num(y_hi) << "\" stroke=\"" << s.color << "\"/>\n";
                }
                svg << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"2.5\" fill=\"" << s.color
                    << "\"/>\n";
            }
        } else {
            svg << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << s.color << "\" points=\"";
            bool first = true;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
                svg << (first ? "" : " ") << num(px(s.x[i])) << "," << num(py(s.y[i]));
                first = false;
            }
            svg << "\"/>\n";
        }
    }

    double ly = top + 16;
    for (const auto& s : series) {
        svg << "<rect x=\"" << num(left + pw - 210) << "\" y=\"" << num(ly - 9) << "\" width=\"12\" height=\"3\" fill=\""
            << s.color << "\"/>\n";
        svg << "<text x=\"" << num(left + pw - 192) << "\" y=\"" << num(ly - 4) << "\">"
            << detail::svg_escape(s.label) << "</text>\n";
        ly += 16;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace dsff::io
