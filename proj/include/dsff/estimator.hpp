#pragma once

// Empirical DSFF from a spectrum set, with the bias-corrected split
// N^2 K = |E L|^2 + Var L of the linear statistic L = sum_j exp(i(t x_j + s y_j)).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <thread>
#include <vector>

#include "dsff/error.hpp"
#include "dsff/spectra.hpp"
#include "dsff/summation.hpp"
#include "dsff/theory.hpp"

namespace dsff {

struct DsffEstimate {
    ComplexTime tau;
    double k_mean = 0.0;    ///< (1/M) sum_m |L_m|^2 / N^2
    double k_stderr = 0.0;  ///< sample std of |L_m|^2/N^2 over sqrt(M)
    /// (|mean L|^2 - S^2/M) / N^2, unbiased for |E L|^2 / N^2.
    double disconnected_unbiased = std::numeric_limits<double>::quiet_NaN();
    /// S^2 / N^2 with S^2 the unbiased sample variance of L. Contains the
    /// contact level 1/N (the i = j terms); do not add `contact` on top.
    double connected = std::numeric_limits<double>::quiet_NaN();
    double connected_stderr = std::numeric_limits<double>::quiet_NaN();
    /// 1/N, reported for display only.
    double contact = 0.0;
    std::size_t m = 0;
    long n = 0;
    /// False when M = 1: only k_mean is defined.
    bool decomposition_available = false;
};

namespace detail {

// Lexicographic (re, im) order so that sums do not depend on the order the
// eigensolver produced.
inline std::vector<std::complex<double>> canonical_order(std::span<const std::complex<double>> eigs) {
    std::vector<std::complex<double>> v(eigs.begin(), eigs.end());
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return v;
}

inline std::complex<double> linear_stat_ordered(std::span<const std::complex<double>> eigs,
                                                const ComplexTime& tau) {
    if (tau.t == 0.0 && tau.s == 0.0) return {static_cast<double>(eigs.size()), 0.0};
    ComplexCompensatedSum sum;
    for (auto z : eigs) {
        const double phase = tau.t * z.real() + tau.s * z.imag();
        sum.add({std::cos(phase), std::sin(phase)});
    }
    return sum.value();
}

}  // namespace detail

/// L = sum_j exp(i(t x_j + s y_j)); independent of eigenvalue order.
inline std::complex<double> linear_stat(std::span<const std::complex<double>> eigs, const ComplexTime& tau) {
    const auto ordered = detail::canonical_order(eigs);
    return detail::linear_stat_ordered(ordered, tau);
}

inline std::complex<double> linear_stat(const SpectrumSample& spectrum, const ComplexTime& tau) {
    return linear_stat(spectrum.eigenvalues, tau);
}

/// Estimate at one tau from the per-sample linear statistics L_m of
/// N-point spectra.
inline DsffEstimate estimate_from_linear_stats(const ComplexTime& tau, std::span<const std::complex<double>> stats,
                                               long n) {
    if (stats.empty()) throw InvalidArgument("dsff estimate: need at least one sample");
    if (n < 1) throw InvalidArgument("dsff estimate: N must be >= 1");
    const double nn = static_cast<double>(n) * static_cast<double>(n);
    const double md = static_cast<double>(stats.size());

    DsffEstimate est;
    est.tau = tau;
    est.m = stats.size();
    est.n = n;
    est.contact = 1.0 / static_cast<double>(n);

    CompensatedSum<double> dsum;
    ComplexCompensatedSum lsum;
    for (auto l : stats) {
        dsum.add(std::norm(l) / nn);
        lsum.add(l);
    }
    est.k_mean = dsum.value() / md;
    const std::complex<double> lbar = lsum.value() / md;

    if (stats.size() == 1) {
        est.k_stderr = 0.0;
        return est;
    }

    CompensatedSum<double> dvar, s2sum;
    for (auto l : stats) {
        const double dev = std::norm(l) / nn - est.k_mean;
        dvar.add(dev * dev);
        s2sum.add(std::norm(l - lbar));
    }
    est.k_stderr = std::sqrt(dvar.value() / (md - 1.0)) / std::sqrt(md);

    const double s2 = s2sum.value() / (md - 1.0);
    est.connected = s2 / nn;
    est.disconnected_unbiased = (std::norm(lbar) - s2 / md) / nn;

    // Spread of the per-sample terms |L_m - mean L|^2 gives the standard
    // error of S^2.
    const double dmean = s2sum.value() / md;
    CompensatedSum<double> cvar;
    for (auto l : stats) {
        const double dev = std::norm(l - lbar) - dmean;
        cvar.add(dev * dev);
    }
    est.connected_stderr = std::sqrt(cvar.value() / (md - 1.0)) / std::sqrt(md) * md / (md - 1.0) / nn;
    est.decomposition_available = true;
    return est;
}

/// Per-sample linear statistics, row-major [sample][tau]. Samples are
/// processed in parallel; each entry is computed independently so the
/// result does not depend on `workers`.
inline std::vector<std::complex<double>> linear_stat_table(const SpectrumSet& set, std::span<const ComplexTime> taus,
                                                           unsigned workers = 1) {
    const std::size_t m = set.samples.size();
    const std::size_t t = taus.size();
    std::vector<std::complex<double>> table(m * t);
    if (m == 0 || t == 0) return table;

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next.fetch_add(1); i < m; i = next.fetch_add(1)) {
            const auto ordered = detail::canonical_order(set.samples[i].eigenvalues);
            for (std::size_t k = 0; k < t; ++k) table[i * t + k] = detail::linear_stat_ordered(ordered, taus[k]);
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(m)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    return table;
}

inline std::vector<DsffEstimate> dsff_grid(const SpectrumSet& set, std::span<const ComplexTime> taus,
                                           unsigned workers = 1) {
    if (set.samples.empty()) throw InvalidArgument("dsff_grid: spectrum set has no samples");
    std::vector<DsffEstimate> out;
    if (taus.empty()) return out;
    const auto table = linear_stat_table(set, taus, workers);
    const std::size_t m = set.samples.size();
    const std::size_t t = taus.size();
    std::vector<std::complex<double>> column(m);
    out.reserve(t);
    for (std::size_t k = 0; k < t; ++k) {
        for (std::size_t i = 0; i < m; ++i) column[i] = table[i * t + k];
        out.push_back(estimate_from_linear_stats(taus[k], column, set.spec.n));
    }
    return out;
}

inline DsffEstimate dsff_point(const SpectrumSet& set, const ComplexTime& tau) {
    const ComplexTime one[] = {tau};
    return dsff_grid(set, one).front();
}

enum class Spacing { log, linear };

/// `points` values of |tau| from tau_min to tau_max (inclusive) at fixed
/// angle theta.
inline std::vector<ComplexTime> build_tau_grid(double theta, double tau_min, double tau_max, std::size_t points,
                                               Spacing spacing) {
    if (points == 0) throw InvalidArgument("build_tau_grid: points must be positive");
    if (!std::isfinite(theta) || !std::isfinite(tau_min) || !std::isfinite(tau_max))
        throw InvalidArgument("build_tau_grid: non-finite parameter");
    if (tau_min < 0.0 || tau_min > tau_max)
        throw InvalidArgument("build_tau_grid: invalid range, need 0 <= tau_min <= tau_max");
    if (spacing == Spacing::log && !(tau_min > 0.0))
        throw InvalidArgument("build_tau_grid: log spacing needs tau_min > 0");

    std::vector<ComplexTime> grid;
    grid.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        double r;
        if (points == 1) {
            r = tau_min;
        } else if (i + 1 == points) {
            r = tau_max;
        } else {
            const double f = static_cast<double>(i) / static_cast<double>(points - 1);
            r = spacing == Spacing::log ? tau_min * std::pow(tau_max / tau_min, f)
                                        : tau_min + (tau_max - tau_min) * f;
        }
        grid.push_back(ComplexTime::polar(r, theta));
    }
    return grid;
}

}  // namespace dsff
