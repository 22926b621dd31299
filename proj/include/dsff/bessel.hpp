#pragma once

// Bessel functions of the first kind J_n(x) for integer order and real
// non-negative argument, plus the weighted squared series
// sum_k w(k) J_k(x)^2 that appear in the variance of linear statistics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dsff/error.hpp"
#include "dsff/summation.hpp"

namespace dsff {

struct BesselPolicy {
    /// Power series below this argument, normalized downward recurrence above.
    double series_threshold = 12.0;
    /// Absolute target for the neglected tail of a weighted series.
    double tail_tolerance = 1e-12;
    /// Largest order a caller may request (and largest truncation order).
    int max_order = 4096;

    void validate() const {
        if (!(series_threshold > 0.0) || !std::isfinite(series_threshold))
            throw PolicyError("BesselPolicy: series_threshold must be positive");
        if (!(tail_tolerance > 0.0) || !std::isfinite(tail_tolerance))
            throw PolicyError("BesselPolicy: tail_tolerance must be positive");
        if (max_order < 1) throw PolicyError("BesselPolicy: max_order must be >= 1");
    }
};

namespace detail {

inline void check_argument(double x) {
    if (!std::isfinite(x)) throw DomainError("bessel: argument is not finite");
    if (x < 0.0) throw DomainError("bessel: argument must be non-negative");
}

// J_n(x) = sum_m (-1)^m (x/2)^(2m+n) / (m! (m+n)!)
inline double bessel_series(int n, double x) {
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    const long double half = 0.5L * x;
    long double term = std::exp(n * std::log(half) - std::lgamma(n + 1.0L));
    if (term == 0.0L) return 0.0;
    const long double q = -half * half;
    long double sum = term;
    for (int m = 1; m < 500; ++m) {
        term *= q / (static_cast<long double>(m) * (m + n));
        sum += term;
        if (std::abs(term) <= 1e-20L * std::abs(sum) && m > half) break;
        if (term == 0.0L) break;
    }
    return static_cast<double>(sum);
}

// Miller's algorithm: three-term recurrence run downward from well above
// the turning point, normalized with J_0 + 2 sum_{k>=1} J_{2k} = 1.
inline std::vector<double> bessel_downward_row(int n_max, double x) {
    const double top = std::max(static_cast<double>(n_max), std::ceil(x));
    int start = static_cast<int>(top + std::ceil(std::sqrt(160.0 * top))) + 20;
    start += start % 2;

    std::vector<double> j(static_cast<std::size_t>(start) + 2, 0.0);
    j[static_cast<std::size_t>(start)] = 1e-30;
    const double two_over_x = 2.0 / x;
    for (int k = start; k >= 1; --k) {
        const auto ku = static_cast<std::size_t>(k);
        j[ku - 1] = k * two_over_x * j[ku] - j[ku + 1];
        if (std::abs(j[ku - 1]) > 1e250) {
            for (std::size_t i = ku - 1; i < j.size(); ++i) j[i] *= 1e-250;
        }
    }

    CompensatedSum<double> norm;
    norm.add(j[0]);
    for (int k = 2; k <= start; k += 2) norm.add(2.0 * j[static_cast<std::size_t>(k)]);
    const double scale = 1.0 / norm.value();

    std::vector<double> row(static_cast<std::size_t>(n_max) + 1);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = j[k] * scale;
    return row;
}

}  // namespace detail

/// J_0(x) .. J_{n_max}(x).
inline std::vector<double> bessel_j_row(int n_max, double x, const BesselPolicy& policy = {}) {
    policy.validate();
    detail::check_argument(x);
    if (n_max < 0) throw DomainError("bessel_j_row: n_max must be non-negative");
    if (n_max > policy.max_order)
        throw DomainError("bessel_j_row: order " + std::to_string(n_max) +
                          " exceeds max_order " + std::to_string(policy.max_order));

    if (x == 0.0) {
        std::vector<double> row(static_cast<std::size_t>(n_max) + 1, 0.0);
        row[0] = 1.0;
        return row;
    }
    if (x < policy.series_threshold) {
        std::vector<double> row(static_cast<std::size_t>(n_max) + 1);
        for (int k = 0; k <= n_max; ++k) row[static_cast<std::size_t>(k)] = detail::bessel_series(k, x);
        return row;
    }
    return detail::bessel_downward_row(n_max, x);
}

/// J_n(x) for any integer n; negative orders use J_{-n} = (-1)^n J_n.
inline double bessel_j(int n, double x, const BesselPolicy& policy = {}) {
    policy.validate();
    detail::check_argument(x);
    const int order = n < 0 ? -n : n;
    if (order > policy.max_order)
        throw DomainError("bessel_j: |n| = " + std::to_string(order) + " exceeds max_order " +
                          std::to_string(policy.max_order));

    double value;
    if (x < policy.series_threshold) {
        value = detail::bessel_series(order, x);
    } else {
        value = detail::bessel_downward_row(order, x)[static_cast<std::size_t>(order)];
    }
    return (n < 0 && order % 2 == 1) ? -value : value;
}

/// Weight w(k) of a series sum_{k in Z} w(k) J_k(x)^2. Every weight is even
/// in k and vanishes at k = 0.
struct BesselWeight {
    enum class Kind {
        abs_k,         ///< |k|
        k_squared,     ///< k^2
        abs_k_sin_sq,  ///< |k| sin^2(phi k)
        abs_k_sym,     ///< |k| sin^2(phi k) for odd k, |k| cos^2(phi k) for even k
    };

    Kind kind = Kind::abs_k;
    double phi = 0.0;

    static BesselWeight abs_k() { return {Kind::abs_k, 0.0}; }
    static BesselWeight k_squared() { return {Kind::k_squared, 0.0}; }
    static BesselWeight abs_k_sin_sq(double phi) { return {Kind::abs_k_sin_sq, phi}; }
    static BesselWeight abs_k_sym(double phi) { return {Kind::abs_k_sym, phi}; }

    double operator()(int k) const {
        const double ak = std::abs(static_cast<double>(k));
        switch (kind) {
            case Kind::abs_k:
                return ak;
            case Kind::k_squared:
                return ak * ak;
            case Kind::abs_k_sin_sq: {
                const double sn = std::sin(phi * k);
                return ak * sn * sn;
            }
            case Kind::abs_k_sym: {
                const double tr = (k % 2 != 0) ? std::sin(phi * k) : std::cos(phi * k);
                return ak * tr * tr;
            }
        }
        return 0.0;
    }
};

/// Initial truncation order K for sums over |k| <= K at argument x:
/// ceil(x) + ceil(4 x^(1/3)) + 20. Past the turning point J_k decays
/// super-exponentially, so this is far into the negligible tail.
inline int bessel_truncation_order(double x) {
    return static_cast<int>(std::ceil(x) + std::ceil(4.0 * std::cbrt(x))) + 20;
}

/// sum_{k in Z} w(k) J_k(x)^2, truncated once the weighted tail term drops
/// below policy.tail_tolerance.
inline double weighted_bessel_series(double x, const BesselWeight& weight,
                                     const BesselPolicy& policy = {}) {
    policy.validate();
    detail::check_argument(x);
    if (x == 0.0) return 0.0;
    if (policy.max_order < 2 * static_cast<int>(std::ceil(x)))
        throw PolicyError("weighted_bessel_series: max_order " + std::to_string(policy.max_order) +
                          " < 2*ceil(x) for x = " + std::to_string(x));

    int order = bessel_truncation_order(x);
    for (;;) {
        if (order > policy.max_order)
            throw PolicyError("weighted_bessel_series: truncation order " + std::to_string(order) +
                              " exceeds max_order " + std::to_string(policy.max_order));
        const auto row = bessel_j_row(order, x, policy);
        const double jk = row.back();
        const double tail = weight.kind == BesselWeight::Kind::k_squared
                                ? static_cast<double>(order) * order * jk * jk
                                : static_cast<double>(order) * jk * jk;
        if (tail < policy.tail_tolerance) {
            CompensatedSum<double> sum;
            for (int k = 1; k <= order; ++k) {
                const double j = row[static_cast<std::size_t>(k)];
                sum.add(weight(k) * j * j);
            }
            return 2.0 * sum.value();
        }
        order += 16;
    }
}

}  // namespace dsff
