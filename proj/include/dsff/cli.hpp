#pragma once

// dsff-lab command-line driver: sample, estimate, theory, compare, verify.
//
// Exit codes: 0 success, 1 numerical or acceptance failure, 2 usage error,
// 3 I/O or format error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ios>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dsff/ensembles.hpp"
#include "dsff/error.hpp"
#include "dsff/estimator.hpp"
#include "dsff/io.hpp"
#include "dsff/quadrature.hpp"
#include "dsff/spectra.hpp"
#include "dsff/theory.hpp"
#include "dsff/verify.hpp"

#ifndef DSFF_VERSION
#define DSFF_VERSION "0.0.0"
#endif

namespace dsff::cli {

enum ExitCode : int { ok = 0, numerical_failure = 1, usage_error = 2, io_error = 3 };

inline constexpr const char* kEnvCacheDir = "DSFF_CACHE_DIR";

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GridMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Relative cache paths live under $DSFF_CACHE_DIR when it is set.
inline std::filesystem::path resolve_cache_path(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative()) {
        if (const char* base = std::getenv(kEnvCacheDir); base && *base) return std::filesystem::path(base) / p;
    }
    return p;
}

struct GridFlags {
    double theta = 0.0;
    std::optional<double> tau_min;
    std::optional<double> tau_max;
    std::size_t points = 120;
    std::string spacing = "log";
    std::vector<double> taus;
};

inline const CLI::Validator& positive_integer() {
    static const CLI::Validator v(
        [](std::string& text) -> std::string {
            try {
                std::size_t used = 0;
                const long long value = std::stoll(text, &used);
                if (used == text.size() && value > 0) return {};
            } catch (const std::exception&) {
            }
            return "must be a positive integer, got '" + text + "'";
        },
        "POSITIVE");
    return v;
}

inline void add_grid_options(CLI::App* cmd, GridFlags& g) {
    cmd->add_option("--theta", g.theta, "Argument of tau (radians)")->capture_default_str();
    cmd->add_option("--tau-min", g.tau_min, "Smallest |tau| (default 0.1)");
    cmd->add_option("--tau-max", g.tau_max, "Largest |tau| (default 2 sqrt(N))");
    cmd->add_option("--points", g.points, "Number of grid points")
        ->check(positive_integer())
        ->capture_default_str();
    cmd->add_option("--spacing", g.spacing, "log or linear")
        ->check(CLI::IsMember({"log", "linear"}))
        ->capture_default_str();
    cmd->add_option("--tau", g.taus, "Explicit |tau| values (overrides the range flags)")->delimiter(',');
}

/// Resolves the grid; the returned json records the resolved parameters.
inline std::vector<ComplexTime> resolve_grid(const GridFlags& g, long n, nlohmann::json& record) {
    if (!std::isfinite(g.theta)) throw UsageError("--theta: must be finite");
    record = nlohmann::json::object();
    record["theta"] = g.theta;
    if (!g.taus.empty()) {
        std::vector<ComplexTime> grid;
        for (double r : g.taus) {
            if (!std::isfinite(r) || r < 0.0) throw UsageError("--tau: values must be finite and >= 0");
            grid.push_back(r == 0.0 ? ComplexTime{} : ComplexTime::polar(r, g.theta));
        }
        record["tau"] = g.taus;
        return grid;
    }
    const double lo = g.tau_min.value_or(0.1);
    const double hi = g.tau_max.value_or(2.0 * timescales(n).tau_hei);
    const auto spacing = g.spacing == "linear" ? Spacing::linear : Spacing::log;
    try {
        auto grid = build_tau_grid(g.theta, lo, hi, g.points, spacing);
        record["tau_min"] = lo;
        record["tau_max"] = hi;
        record["points"] = g.points;
        record["spacing"] = g.spacing;
        return grid;
    } catch (const InvalidArgument& e) {
        throw UsageError(std::string("grid: ") + e.what());
    }
}

inline nlohmann::json base_config(const std::string& command) {
    return {{"command", command}, {"version", DSFF_VERSION}};
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

inline io::Table read_table_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    try {
        return io::read_csv(in);
    } catch (const io::TableFormatError& e) {
        throw io::TableFormatError(path + ": " + e.what());
    }
}

// Table to --out (or stdout) plus optional --json mirror.
inline void emit_table(const io::Table& table, const std::string& out_path, const std::string& json_path,
                       std::ostream& out) {
    const auto csv = io::to_csv(table);
    if (out_path.empty() || out_path == "-")
        out << csv;
    else
        write_text_file(out_path, csv);
    if (!json_path.empty()) write_text_file(json_path, io::to_json(table).dump(2) + "\n");
}

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------
// sample

struct SampleFlags {
    std::string field = "complex";
    std::string dist = "gaussian";
    long n = 0;
    std::size_t samples = 0;
    std::optional<std::uint64_t> seed;
    std::string out;
    unsigned workers = default_workers();
};

inline int cmd_sample(const SampleFlags& f, std::ostream& out) {
    EnsembleSpec spec;
    spec.field = *parse_field(f.field);
    spec.distribution = *parse_distribution(f.dist);
    spec.n = f.n;
    const std::uint64_t seed = f.seed ? *f.seed : std::random_device{}() * 0x100000000ull + std::random_device{}();
    const auto path = resolve_cache_path(f.out);
    const auto set = sample_spectra(spec, f.samples, seed, f.workers);
    save_spectra(set, path);
    auto config = base_config("sample");
    config["spec"] = to_json(spec);
    config["samples"] = f.samples;
    config["master_seed"] = seed;
    out << config.dump() << '\n';
    return ok;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateFlags {
    std::string cache;
    GridFlags grid;
    std::string out;
    std::string json;
    unsigned workers = default_workers();
};

inline io::Table estimate_table(const EstimateFlags& f) {
    const auto path = resolve_cache_path(f.cache);
    const auto set = load_spectra(path);
    nlohmann::json grid_record;
    const auto taus = resolve_grid(f.grid, set.spec.n, grid_record);
    const auto estimates = dsff_grid(set, taus, f.workers);

    auto config = base_config("estimate");
    config["spec"] = to_json(set.spec);
    config["samples"] = set.sample_count();
    config["master_seed"] = set.master_seed;
    config["grid"] = grid_record;
    return io::estimates_table(estimates, f.grid.theta, config);
}

inline int cmd_estimate(const EstimateFlags& f, std::ostream& out) {
    emit_table(estimate_table(f), f.out, f.json, out);
    return ok;
}

// ---------------------------------------------------------------------------
// theory

struct TheoryFlags {
    std::string model = "theorem";
    long n = 0;
    int beta = 2;
    double kappa4 = 0.0;
    GridFlags grid;
    std::string grid_from;
    std::string out;
    std::string json;
};

inline io::TheoryRow theory_row(const TheoryFlags& f, const ComplexTime& tau, double theta, const TheoryContext& ctx) {
    io::TheoryRow row;
    row.theta = theta;
    row.tau = tau;
    row.n = f.n;
    const double nd = static_cast<double>(f.n);
    const Beta beta = f.beta == 1 ? Beta::real : Beta::complex;
    if (f.model == "theorem") {
        const auto p = dsff_theory(tau, f.n, f.kappa4, beta, ctx);
        row.k_total = p.k_total;
        row.disconnected = p.disconnected;
        row.connected = p.connected;
        row.contact = 1.0 / nd;
        row.validity_warning = p.validity_warning;
        row.detail = p;
    } else if (f.model == "simplified") {
        if (!(tau.abs_tau() > 0.0)) throw UsageError("--model simplified: requires |tau| > 0 (grid contains tau = 0)");
        row.k_total = dsff_simplified(tau, f.n, beta, ctx.bessel);
        const double r = 2.0 * bessel_j(1, tau.abs_tau(), ctx.bessel) / tau.abs_tau();
        row.disconnected = r * r;
        row.connected = row.k_total - row.disconnected;
        row.contact = 1.0 / nd;
        row.validity_warning = tau.abs_tau() > std::pow(nd, 2.0 / 7.0);
    } else {
        const auto g = ginibre_exact_dsff(tau, f.n, ctx.bessel);
        row.k_total = g.k_total;
        row.disconnected = g.disconnected;
        row.connected = g.connected;
        row.contact = g.contact;
    }
    return row;
}

inline io::Table theory_table(const TheoryFlags& f) {
    if (f.n < 1) throw UsageError("--n: must be a positive integer");
    if (f.beta != 1 && f.beta != 2) throw UsageError("--beta: must be 1 or 2");
    if (!std::isfinite(f.kappa4)) throw UsageError("--kappa4: must be finite");
    if (f.model == "ginibre-exact" && (f.beta != 2 || f.kappa4 != 0.0))
        throw UsageError("--model ginibre-exact: only defined for beta = 2, kappa4 = 0");

    auto config = base_config("theory");
    config["model"] = f.model;
    config["n"] = f.n;
    config["beta"] = f.beta;
    config["kappa4"] = f.kappa4;

    std::vector<std::pair<ComplexTime, double>> points;  // (tau, theta)
    if (!f.grid_from.empty()) {
        const auto src = read_table_file(f.grid_from);
        for (std::size_t i = 0; i < src.rows.size(); ++i)
            points.push_back({{src.number(i, "t"), src.number(i, "s")}, src.number(i, "theta")});
        config["grid"] = {{"from", src.config.value("grid", nlohmann::json::object())}, {"rows", src.rows.size()}};
    } else {
        nlohmann::json record;
        for (const auto& tau : resolve_grid(f.grid, f.n, record)) points.push_back({tau, f.grid.theta});
        config["grid"] = record;
    }

    TheoryContext ctx;
    std::vector<io::TheoryRow> rows;
    rows.reserve(points.size());
    for (const auto& [tau, theta] : points) rows.push_back(theory_row(f, tau, theta, ctx));
    return io::theory_table(rows, config);
}

inline int cmd_theory(const TheoryFlags& f, std::ostream& out) {
    emit_table(theory_table(f), f.out, f.json, out);
    return ok;
}

// ---------------------------------------------------------------------------
// compare

struct CompareFlags {
    std::string estimate;
    std::string theory;
    std::string out;
    std::string svg;
    bool subtract_disconnected = false;
    std::optional<double> min_fraction;
};

namespace detail {

inline bool same_coordinate(double a, double b) {
    return a == b || std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

struct CompareResult {
    io::Table merged;
    std::size_t within = 0;  ///< rows with |z| <= 3
    std::size_t rows = 0;
    double fraction() const { return rows ? static_cast<double>(within) / static_cast<double>(rows) : 0.0; }
};

/// (k_mean - k_total)/k_stderr; an exact match with zero error counts as 0.
inline double z_score(double k_mean, double k_total, double stderr_) {
    if (k_mean == k_total) return 0.0;
    return (k_mean - k_total) / stderr_;
}

inline CompareResult compare_tables(const io::Table& est, const io::Table& th) {
    const std::size_t rows = std::min(est.rows.size(), th.rows.size());
    for (std::size_t i = 0; i < rows; ++i) {
        for (const char* col : {"theta", "t", "s"}) {
            if (!detail::same_coordinate(est.number(i, col), th.number(i, col)))
                throw GridMismatchError("grid mismatch at row " + std::to_string(i + 1) + ": " + col + " = " +
                                        est.rows[i][est.column(col)] + " (estimate) vs " +
                                        th.rows[i][th.column(col)] + " (theory)");
        }
    }
    if (est.rows.size() != th.rows.size())
        throw GridMismatchError("grid mismatch at row " + std::to_string(rows + 1) + ": estimate has " +
                                std::to_string(est.rows.size()) + " rows, theory has " +
                                std::to_string(th.rows.size()));

    CompareResult result;
    result.rows = rows;
    auto& m = result.merged;
    m.config = base_config("compare");
    m.config["estimate"] = est.config;
    m.config["theory"] = th.config;
    m.columns = {"theta",     "abs_tau",      "t",          "s",
                 "k_mean",    "k_stderr",     "k_total",    "z",
                 "connected", "connected_stderr", "theory_connected", "disconnected_unbiased",
                 "theory_disconnected"};
    for (std::size_t i = 0; i < rows; ++i) {
        const double z = z_score(est.number(i, "k_mean"), th.number(i, "k_total"), est.number(i, "k_stderr"));
        if (std::abs(z) <= 3.0) ++result.within;
        const auto cell = [&](const io::Table& t, const char* col) {
            return t.has_column(col) ? t.rows[i][t.column(col)] : std::string("nan");
        };
        m.rows.push_back({cell(est, "theta"), cell(est, "abs_tau"), cell(est, "t"), cell(est, "s"),
                          cell(est, "k_mean"), cell(est, "k_stderr"), cell(th, "k_total"), io::format_double(z),
                          cell(est, "connected"), cell(est, "connected_stderr"), cell(th, "connected"),
                          cell(est, "disconnected_unbiased"), cell(th, "disconnected")});
    }
    return result;
}

inline std::string compare_svg(const io::Table& merged, bool subtract_disconnected) {
    io::PlotSeries emp{"empirical K", "#1f77b4", {}, {}, {}, true};
    io::PlotSeries th{"theory K", "#d62728", {}, {}, {}, false};
    io::PlotSeries emp_c{"empirical K - disconnected", "#2ca02c", {}, {}, {}, true};
    io::PlotSeries th_c{"theory connected", "#ff7f0e", {}, {}, {}, false};
    for (std::size_t i = 0; i < merged.rows.size(); ++i) {
        const double x = merged.number(i, "abs_tau");
        emp.x.push_back(x);
        emp.y.push_back(merged.number(i, "k_mean"));
        emp.err.push_back(merged.number(i, "k_stderr"));
        th.x.push_back(x);
        th.y.push_back(merged.number(i, "k_total"));
        emp_c.x.push_back(x);
        emp_c.y.push_back(merged.number(i, "connected"));
        emp_c.err.push_back(merged.number(i, "connected_stderr"));
        th_c.x.push_back(x);
        th_c.y.push_back(merged.number(i, "theory_connected"));
    }
    std::vector<io::PlotSeries> series{emp, th};
    if (subtract_disconnected) {
        series.push_back(emp_c);
        series.push_back(th_c);
    }
    io::PlotOptions opt;
    opt.title = "DSFF: empirical vs theory";
    return io::render_loglog_svg(series, opt);
}

inline int cmd_compare(const CompareFlags& f, std::ostream& out, std::ostream& err) {
    const auto est = read_table_file(f.estimate);
    const auto th = read_table_file(f.theory);
    auto result = compare_tables(est, th);
    result.merged.config["subtract_disconnected"] = f.subtract_disconnected;
    emit_table(result.merged, f.out, "", out);
    if (!f.svg.empty()) write_text_file(f.svg, compare_svg(result.merged, f.subtract_disconnected));
    std::ostream& summary = (f.out.empty() || f.out == "-") ? err : out;
    summary << "within 3 sigma: " << result.within << "/" << result.rows << " ("
            << io::format_double(result.fraction()) << ")\n";
    if (f.min_fraction && result.fraction() < *f.min_fraction) return numerical_failure;
    return ok;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyFlags {
    std::string suite = "all";
    std::string grid = "1x";
    std::string out;
};

inline int cmd_verify(const VerifyFlags& f, std::ostream& out) {
    const DiskGrid grid = f.grid == "2x" ? default_disk_grid().refined() : default_disk_grid();
    const auto report = verify::run(f.suite, grid);
    auto j = report.to_json();
    j["config"] = base_config("verify");
    j["config"]["suite"] = f.suite;
    j["config"]["grid"] = f.grid;
    const auto text = j.dump(2) + "\n";
    out << text;
    if (!f.out.empty()) write_text_file(f.out, text);
    return report.all_pass() ? ok : numerical_failure;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dissipative spectral form factor laboratory", "dsff-lab"};
    app.set_version_flag("--version", std::string("dsff-lab ") + DSFF_VERSION);
    app.require_subcommand(1);

    SampleFlags sf;
    auto* sample = app.add_subcommand("sample", "Sample an ensemble and cache its spectra");
    sample->add_option("--field", sf.field, "real or complex")
        ->check(CLI::IsMember({"real", "complex"}))
        ->capture_default_str();
    sample->add_option("--dist", sf.dist, "gaussian, rademacher or uniform")
        ->check(CLI::IsMember({"gaussian", "rademacher", "uniform"}))
        ->capture_default_str();
    sample->add_option("--n", sf.n, "Matrix size")->required()->check(positive_integer());
    sample->add_option("--samples", sf.samples, "Number of matrices")->required()->check(positive_integer());
    sample->add_option("--seed", sf.seed, "Master seed (random when omitted; echoed in the output)");
    sample->add_option("--out", sf.out, "Spectrum cache path")->required();
    sample->add_option("--workers", sf.workers, "Worker threads")->check(positive_integer());

    EstimateFlags ef;
    auto* estimate = app.add_subcommand("estimate", "Estimate the DSFF from a spectrum cache");
    estimate->add_option("--cache", ef.cache, "Spectrum cache path")->required();
    add_grid_options(estimate, ef.grid);
    estimate->add_option("--out", ef.out, "CSV output (stdout when omitted)");
    estimate->add_option("--json", ef.json, "JSON output");
    estimate->add_option("--workers", ef.workers, "Worker threads")->check(positive_integer());

    TheoryFlags tf;
    auto* theory = app.add_subcommand("theory", "Evaluate the theoretical DSFF");
    theory->add_option("--model", tf.model, "theorem, simplified or ginibre-exact")
        ->check(CLI::IsMember({"theorem", "simplified", "ginibre-exact"}))
        ->capture_default_str();
    theory->add_option("--n", tf.n, "Matrix size")->required()->check(positive_integer());
    theory->add_option("--beta", tf.beta, "1 (real) or 2 (complex)")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    theory->add_option("--kappa4", tf.kappa4, "Fourth cumulant of the entries")->capture_default_str();
    add_grid_options(theory, tf.grid);
    theory->add_option("--grid-from", tf.grid_from, "Take (theta, t, s) rows from an estimate CSV");
    theory->add_option("--out", tf.out, "CSV output (stdout when omitted)");
    theory->add_option("--json", tf.json, "JSON output");

    CompareFlags cf;
    auto* compare = app.add_subcommand("compare", "Merge an estimate with a theory table");
    compare->add_option("--estimate", cf.estimate, "Estimate CSV")->required();
    compare->add_option("--theory", cf.theory, "Theory CSV")->required();
    compare->add_option("--out", cf.out, "Merged CSV (stdout when omitted)");
    compare->add_option("--svg", cf.svg, "SVG plot output");
    compare->add_flag("--subtract-disconnected", cf.subtract_disconnected, "Also plot the connected part");
    compare->add_option("--min-fraction", cf.min_fraction, "Exit 1 when fewer rows have |z| <= 3")
        ->check(CLI::Range(0.0, 1.0));

    VerifyFlags vf;
    auto* verify = app.add_subcommand("verify", "Run the deterministic invariant suites");
    verify->add_option("--suite", vf.suite, "all, bessel, quadrature, theory or estimator")
        ->check(CLI::IsMember({"all", "bessel", "quadrature", "theory", "estimator"}))
        ->capture_default_str();
    verify->add_option("--grid", vf.grid, "Quadrature resolution: 1x or 2x")
        ->check(CLI::IsMember({"1x", "2x"}))
        ->capture_default_str();
    verify->add_option("--out", vf.out, "Also write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? ok : usage_error;
    }

    try {
        if (*sample) return cmd_sample(sf, out);
        if (*estimate) return cmd_estimate(ef, out);
        if (*theory) {
            if (!tf.grid_from.empty() && (!tf.grid.taus.empty() || theory->count("--tau-min") ||
                                          theory->count("--tau-max") || theory->count("--points")))
                throw UsageError("--grid-from: cannot be combined with grid flags");
            return cmd_theory(tf, out);
        }
        if (*compare) return cmd_compare(cf, out, err);
        if (*verify) return cmd_verify(vf, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const GridMismatchError& e) {
        err << "error: " << e.what() << '\n';
        return io_error;
    } catch (const SpectraFormatError& e) {
        err << "error: " << e.what() << '\n';
        return io_error;
    } catch (const io::TableFormatError& e) {
        err << "error: " << e.what() << '\n';
        return io_error;
    } catch (const std::ios_base::failure& e) {
        err << "error: " << e.what() << '\n';
        return io_error;
    } catch (const EigenSolverError& e) {
        err << "error: eigensolver failed on sample " << e.sample_index() << ": " << e.what() << '\n';
        return numerical_failure;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return numerical_failure;
    }
    return usage_error;
}

}  // namespace dsff::cli
