#pragma once

// Deterministic identity checks across the library. Each check records the
// measured deviation and its tolerance; `dsff-lab verify` reports them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsff/bessel.hpp"
#include "dsff/estimator.hpp"
#include "dsff/quadrature.hpp"
#include "dsff/summation.hpp"
#include "dsff/theory.hpp"

namespace dsff::verify {

struct CheckResult {
    std::string suite;
    std::string name;
    double measured = 0.0;  ///< deviation (or bound slack) that must not exceed tolerance
    double tolerance = 0.0;
    bool pass = false;
};

class Report {
public:
    void add(std::string suite, std::string name, double measured, double tolerance) {
        const bool ok = std::isfinite(measured) && measured <= tolerance;
        checks_.push_back({std::move(suite), std::move(name), measured, tolerance, ok});
    }

    const std::vector<CheckResult>& checks() const noexcept { return checks_; }

    bool all_pass() const {
        return std::all_of(checks_.begin(), checks_.end(), [](const auto& c) { return c.pass; });
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : checks_) {
            arr.push_back({{"suite", c.suite},
                           {"name", c.name},
                           {"measured", c.measured},
                           {"tolerance", c.tolerance},
                           {"pass", c.pass}});
        }
        return {{"checks", arr}, {"pass", all_pass()}};
    }

private:
    std::vector<CheckResult> checks_;
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline std::complex<double> f_tau(double t, double s, double x, double y) {
    return std::polar(1.0, t * x + s * y);
}

// Deterministic (t, s) pairs with 0 < |tau| <= max_abs.
inline std::vector<ComplexTime> sample_taus(std::size_t count, double max_abs, unsigned seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> radius(0.05, max_abs);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::vector<ComplexTime> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(ComplexTime::polar(radius(eng), angle(eng)));
    return out;
}

}  // namespace detail

inline void bessel_suite(Report& report, const BesselPolicy& policy = {}) {
    const std::string suite = "bessel";
    using detail::fmt;

    for (double x : {0.5, 1.0, 5.0, 11.5, 12.0, 20.0, 35.0, 50.0}) {
        const int order = bessel_truncation_order(x);
        const auto row = bessel_j_row(order, x, policy);
        CompensatedSum<double> sum;
        sum.add(row[0] * row[0]);
        for (int k = 1; k <= order; ++k) sum.add(2.0 * row[static_cast<std::size_t>(k)] * row[static_cast<std::size_t>(k)]);
        report.add(suite, "normalization x=" + fmt(x), std::abs(sum.value() - 1.0), 1e-10);
    }

    double reflection = 0.0;
    for (double x : {0.3, 2.0, 13.0, 40.0}) {
        for (int n = 1; n <= 7; ++n) {
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            reflection = std::max(reflection, std::abs(bessel_j(-n, x, policy) - sign * bessel_j(n, x, policy)));
        }
    }
    report.add(suite, "reflection J_{-n} = (-1)^n J_n", reflection, 0.0);

    for (double x : {1.0, 4.0, 15.0}) {
        const double value = weighted_bessel_series(x, BesselWeight::k_squared(), policy);
        report.add(suite, "k^2 series = x^2/2 x=" + fmt(x), std::abs(value / (x * x / 2.0) - 1.0), 1e-8);
        const double abs_k = weighted_bessel_series(x, BesselWeight::abs_k(), policy);
        report.add(suite, "|k| series <= x/sqrt2 x=" + fmt(x), abs_k - x / std::numbers::sqrt2, 0.0);
    }

    for (double x : {1.0, 5.0, 15.0}) {
        const int order = bessel_truncation_order(x);
        const auto row = bessel_j_row(order, x, policy);
        for (double theta : {0.0, std::numbers::pi / 2.0, std::numbers::pi}) {
            CompensatedSum<double> sum;
            sum.add(row[0] * row[0]);
            for (int k = 1; k <= order; ++k) {
                const double j = row[static_cast<std::size_t>(k)];
                sum.add(2.0 * j * j * std::cos(k * theta));
            }
            const double closed = bessel_j(0, x * std::sqrt(2.0 - 2.0 * std::cos(theta)), policy);
            report.add(suite, "Graf addition x=" + fmt(x) + " theta=" + fmt(theta),
                       std::abs(sum.value() - closed), 1e-9);
        }
    }

    double derivative = 0.0;
    const double h = 1e-5;
    for (int k = 1; k <= 3; ++k) {
        for (double z : {0.5, 1.7, 3.0, 6.2, 10.0}) {
            auto g = [&](double u) { return std::pow(u, k) * bessel_j(k, u, policy); };
            const double lhs = (g(z + h) - g(z - h)) / (2.0 * h) / z;
            const double rhs = std::pow(z, k - 1) * bessel_j(k - 1, z, policy);
            derivative = std::max(derivative, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
        }
    }
    report.add(suite, "derivative identity (1/z d/dz)(z^k J_k) = z^(k-1) J_(k-1)", derivative, 1e-6);

    const double x = 200.0;
    report.add(suite, "asymptotic envelope |J_0(200)|",
               std::abs(bessel_j(0, x, policy)) - 1.1 * std::sqrt(2.0 / (std::numbers::pi * x)), 0.0);
}

inline void quadrature_suite(Report& report, const DiskGrid& grid, const BesselPolicy& policy = {}) {
    const std::string suite = "quadrature";
    using detail::fmt;
    using detail::f_tau;
    const double pi = std::numbers::pi;

    CompensatedSum<double> area;
    for (const auto& node : grid.nodes()) area.add(node.w);
    report.add(suite, "disk area", std::abs(area.value() - pi), 1e-12);

    double first = 0.0, second = 0.0, laplacian = 0.0, gradient = 0.0, sym_gradient = 0.0;
    for (const auto& tau : detail::sample_taus(20, 20.0, 7)) {
        const double x = tau.abs_tau();
        const double t = tau.t, s = tau.s;
        const auto i1 = disk_integral([&](double a, double b) { return f_tau(t, s, a, b); }, grid);
        first = std::max(first, std::abs(i1 - 2.0 * pi * bessel_j(1, x, policy) / x));
        const auto i2 = disk_integral(
            [&](double a, double b) { return f_tau(t, s, a, b) * (2.0 * (a * a + b * b) - 1.0); }, grid);
        second = std::max(second, std::abs(i2 + 2.0 * pi * bessel_j(3, x, policy) / x));
        const auto lap = disk_integral([&](double a, double b) { return -x * x * f_tau(t, s, a, b); }, grid);
        laplacian = std::max(laplacian, std::abs(lap / (8.0 * pi) + x * bessel_j(1, x, policy) / 4.0));
        const auto grad = disk_integral([&](double, double) { return t * t + s * s; }, grid);
        gradient = std::max(gradient, std::abs(grad.real() / (4.0 * pi) - x * x / 4.0));
        const auto symg = disk_integral(
            [&](double, double b) {
                const double c = std::cos(s * b), sn = std::sin(s * b);
                return t * t * c * c + s * s * sn * sn;
            },
            grid);
        const double ramp = s == 0.0 ? t * t / 4.0 : (t * t - s * s) * bessel_j(1, 2.0 * std::abs(s), policy) / (4.0 * std::abs(s));
        sym_gradient = std::max(sym_gradient, std::abs(symg.real() / (2.0 * pi) - (x * x / 4.0 + ramp)));
    }
    report.add(suite, "disk integral of f_tau = 2pi J_1/|tau|", first, 1e-8);
    report.add(suite, "disk integral of f_tau (2|z|^2-1) = -2pi J_3/|tau|", second, 1e-8);
    report.add(suite, "laplacian term = -|tau| J_1/4", laplacian, 1e-8);
    report.add(suite, "gradient norm = |tau|^2/4", gradient, 1e-10);
    report.add(suite, "symmetrized gradient = |tau|^2/4 + ramp", sym_gradient, 1e-8);

    const std::size_t circle = 256;
    double boundary = 0.0, kappa4 = 0.0;
    for (const auto& tau : detail::sample_taus(10, 15.0, 11)) {
        const double x = tau.abs_tau();
        const auto avg = boundary_average(
            [&](double th) { return f_tau(tau.t, tau.s, std::cos(th), std::sin(th)); }, circle);
        boundary = std::max(boundary, std::abs(avg - bessel_j(0, x, policy)));
        const auto disk = disk_integral([&](double a, double b) { return f_tau(tau.t, tau.s, a, b); }, grid) / pi;
        kappa4 = std::max(kappa4, std::abs(std::norm(disk - avg) - kappa4_variance_coefficient(x, policy)));
    }
    report.add(suite, "boundary average of f_tau = J_0(|tau|)", boundary, 1e-10);
    report.add(suite, "kappa4 coefficient by quadrature", kappa4, 1e-8);

    double fourier = 0.0, sym_fourier = 0.0;
    for (const auto& tau : detail::sample_taus(6, 12.0, 13)) {
        const double x = tau.abs_tau();
        const double phi = tau.phi();
        for (int k = -6; k <= 6; ++k) {
            const auto coef = boundary_average(
                [&](double th) { return f_tau(tau.t, tau.s, std::cos(th), std::sin(th)) * std::polar(1.0, -k * th); },
                circle);
            const auto closed = std::polar(1.0, phi * k) * bessel_j(k, x, policy);
            fourier = std::max(fourier, std::abs(coef - closed));
            const auto sym = boundary_average(
                [&](double th) {
                    return std::polar(1.0, tau.t * std::cos(th)) * std::cos(tau.s * std::sin(th)) *
                           std::polar(1.0, -k * th);
                },
                circle);
            const double w = k == 0 ? 1.0 : BesselWeight::abs_k_sym(phi)(k) / std::abs(k);
            const double j = bessel_j(k, x, policy);
            sym_fourier = std::max(sym_fourier, std::abs(std::norm(sym) - w * j * j));
        }
    }
    report.add(suite, "boundary Fourier coefficient = e^{i phi k} J_k(|tau|)", fourier, 1e-10);
    report.add(suite, "symmetrized Fourier modulus matches parity weight", sym_fourier, 1e-10);

    for (double t : {0.0, 2.0, 10.0}) {
        report.add(suite, "chord integral = J_0(t)/2 t=" + fmt(t),
                   std::abs(chord_integral(t, 64) - 0.5 * bessel_j(0, t, policy)), 1e-10);
    }

    const double small = 1e-3;
    report.add(suite, "real-axis correction (0, 1e-3) ~ s^2/8",
               std::abs(real_axis_correction_integral(0.0, small, grid) - small * small / 8.0), 1e-9);
    report.add(suite, "real-axis correction (t, 0) = 0", std::abs(real_axis_correction_integral(3.0, 0.0, grid)),
               0.0);
    double reflect = 0.0;
    for (const auto& tau : detail::sample_taus(5, 10.0, 17)) {
        const double base = real_axis_correction_integral(tau.t, tau.s, grid);
        reflect = std::max({reflect, std::abs(real_axis_correction_integral(-tau.t, tau.s, grid) - base),
                            std::abs(real_axis_correction_integral(tau.t, -tau.s, grid) - base)});
    }
    report.add(suite, "real-axis correction even in t and s", reflect, 1e-14);
    const DiskGrid finer = grid.refined();
    report.add(suite, "real-axis correction converged at (1,1)",
               std::abs(real_axis_correction_integral(1.0, 1.0, grid) - real_axis_correction_integral(1.0, 1.0, finer)),
               1e-8);
}

inline void theory_suite(Report& report, const TheoryContext& ctx = {}) {
    const std::string suite = "theory";

    double rotation = 0.0;
    const double radius = 7.3;
    const double k0 = dsff_theory(ComplexTime{radius, 0.0}, 1000, 0.0, Beta::complex, ctx).k_total;
    for (int i = 1; i <= 10; ++i) {
        const double theta = 0.61 * i;
        const double k = dsff_theory(ComplexTime::polar(radius, theta), 1000, 0.0, Beta::complex, ctx).k_total;
        rotation = std::max(rotation, std::abs(k - k0));
    }
    report.add(suite, "complex case rotationally symmetric", rotation, 1e-12);

    double reflection = 0.0;
    for (const auto& tau : detail::sample_taus(6, 12.0, 23)) {
        const double k = dsff_theory(tau, 500, -2.0, Beta::real, ctx).k_total;
        reflection = std::max({reflection,
                               std::abs(dsff_theory({tau.t, -tau.s}, 500, -2.0, Beta::real, ctx).k_total - k),
                               std::abs(dsff_theory({-tau.t, tau.s}, 500, -2.0, Beta::real, ctx).k_total - k)});
    }
    report.add(suite, "real case even in t and s", reflection, 1e-12);

    report.add(suite, "K(0,0) = 1 (theorem, complex)",
               std::abs(dsff_theory({0.0, 0.0}, 100, 0.0, Beta::complex, ctx).k_total - 1.0), 1e-15);
    report.add(suite, "K(0,0) = 1 (theorem, real)",
               std::abs(dsff_theory({0.0, 0.0}, 100, -2.0, Beta::real, ctx).k_total - 1.0), 1e-14);
    report.add(suite, "K(0,0) = 1 (Ginibre exact)",
               std::abs(ginibre_exact_dsff({0.0, 0.0}, 100, ctx.bessel).k_total - 1.0), 1e-15);

    const ComplexTime mid{12.0, 0.0};
    const double full = dsff_theory(mid, 1000000, 0.0, Beta::complex, ctx).k_total;
    const double simple = dsff_simplified(mid, 1000000, Beta::complex, ctx.bessel);
    report.add(suite, "simplified vs theorem at |tau|=12, N=1e6", std::abs(full - simple) / full, 0.05);

    const long n = 100000;
    double ramp = 0.0;
    for (double x : {5.0, 10.0, 20.0}) {
        const double connected = ginibre_exact_dsff({x, 0.0}, n, ctx.bessel).connected;
        const double target = x * x / (4.0 * static_cast<double>(n) * n);
        ramp = std::max(ramp, std::abs(connected / target - 1.0) / (x * x / static_cast<double>(n)));
    }
    report.add(suite, "Ginibre connected = |tau|^2/4N^2 (1 + O(|tau|^2/N))", ramp, 1.0);

    const double ratio = dsff_theory({std::pow(1000.0, 0.45), 0.0}, 1000, 0.0, Beta::real, ctx).connected /
                         dsff_theory({std::pow(1000.0, 0.45), 0.0}, 1000, 0.0, Beta::complex, ctx).connected;
    report.add(suite, "real/complex connected ratio at theta=0 is 2", std::abs(ratio - 2.0), 1e-12);
}

inline void estimator_suite(Report& report) {
    const std::string suite = "estimator";
    std::mt19937_64 eng(2024);
    std::normal_distribution<double> normal;

    double identity = 0.0;
    for (std::size_t n : {1u, 2u, 5u, 17u, 64u}) {
        std::vector<std::complex<double>> eigs(n);
        for (auto& z : eigs) z = {normal(eng), normal(eng)};
        for (const auto& tau : detail::sample_taus(8, 30.0, 29)) {
            std::complex<double> brute{};
            for (auto a : eigs)
                for (auto b : eigs)
                    brute += std::polar(1.0, tau.t * (a.real() - b.real()) + tau.s * (a.imag() - b.imag()));
            const double nn = static_cast<double>(n * n);
            identity = std::max(identity, std::abs(brute.real() / nn - std::norm(linear_stat(eigs, tau)) / nn));
        }
    }
    report.add(suite, "double sum = |L|^2/N^2 (N <= 64)", identity, 1e-12);

    SpectrumSet set;
    set.spec = {Field::real, Distribution::gaussian, 6};
    for (std::size_t m = 0; m < 40; ++m) {
        SpectrumSample s;
        s.sample_index = m;
        for (int k = 0; k < 3; ++k) {
            const std::complex<double> z{normal(eng), std::abs(normal(eng))};
            s.eigenvalues.push_back(z);
            s.eigenvalues.push_back(std::conj(z));
        }
        set.samples.push_back(std::move(s));
    }
    const auto taus = detail::sample_taus(5, 8.0, 31);
    const auto table = linear_stat_table(set, taus);
    double algebra = 0.0, covariance = 0.0;
    for (std::size_t k = 0; k < taus.size(); ++k) {
        std::vector<std::complex<double>> stats;
        for (std::size_t m = 0; m < set.samples.size(); ++m) stats.push_back(table[m * taus.size() + k]);
        const auto est = estimate_from_linear_stats(taus[k], stats, set.spec.n);
        const double md = static_cast<double>(stats.size());
        std::complex<double> lbar{};
        double mean_sq = 0.0, s2 = 0.0;
        for (auto l : stats) {
            lbar += l / md;
            mean_sq += std::norm(l) / md;
        }
        for (auto l : stats) s2 += std::norm(l - lbar) / (md - 1.0);
        algebra = std::max(algebra, std::abs(mean_sq - (std::norm(lbar) + (md - 1.0) / md * s2)) / mean_sq);
        const auto mirrored = dsff_point(set, {taus[k].t, -taus[k].s});
        covariance = std::max(covariance, std::abs(mirrored.k_mean - est.k_mean));
    }
    report.add(suite, "mean |L|^2 = |mean L|^2 + (M-1)/M S^2", algebra, 1e-12);
    report.add(suite, "conjugation covariance (t,s) vs (t,-s)", covariance, 1e-12);

    const auto zero = dsff_point(set, {0.0, 0.0});
    report.add(suite, "tau=0: k_mean = 1", std::abs(zero.k_mean - 1.0), 0.0);
    report.add(suite, "tau=0: k_stderr = 0", zero.k_stderr, 0.0);
    report.add(suite, "tau=0: connected = 0", std::abs(zero.connected), 0.0);

    SpectrumSet shuffled = set;
    for (auto& s : shuffled.samples) std::shuffle(s.eigenvalues.begin(), s.eigenvalues.end(), eng);
    double permutation = 0.0;
    const auto a = dsff_grid(set, taus);
    const auto b = dsff_grid(shuffled, taus);
    for (std::size_t k = 0; k < taus.size(); ++k) {
        if (a[k].k_mean != b[k].k_mean || a[k].connected != b[k].connected ||
            a[k].disconnected_unbiased != b[k].disconnected_unbiased)
            permutation = 1.0;
    }
    report.add(suite, "permutation invariance (bitwise)", permutation, 0.0);
}

/// `suite` is one of all, bessel, quadrature, theory, estimator.
inline Report run(const std::string& suite, const DiskGrid& grid) {
    Report report;
    TheoryContext ctx;
    ctx.grid = &grid;
    if (suite == "all" || suite == "bessel") bessel_suite(report);
    if (suite == "all" || suite == "quadrature") quadrature_suite(report, grid);
    if (suite == "all" || suite == "theory") theory_suite(report, ctx);
    if (suite == "all" || suite == "estimator") estimator_suite(report);
    return report;
}

}  // namespace dsff::verify
