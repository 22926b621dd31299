#pragma once

// Analytic predictions for the averaged DSFF of i.i.d. matrices:
// the mean/variance of the linear statistic sum_i exp(i(t x_i + s y_i)),
// the resulting K = e^2 + v / N^2, the large-|tau| simplified form and the
// exact complex Ginibre expression.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dsff/bessel.hpp"
#include "dsff/error.hpp"
#include "dsff/quadrature.hpp"

namespace dsff {

/// Complex time tau = t + i s.
struct ComplexTime {
    double t = 0.0;
    double s = 0.0;

    static ComplexTime polar(double abs_tau, double theta) {
        return {abs_tau * std::cos(theta), abs_tau * std::sin(theta)};
    }

    double abs_tau() const { return std::hypot(t, s); }
    /// Argument of tau; 0 at tau = 0.
    double theta() const { return (t == 0.0 && s == 0.0) ? 0.0 : std::atan2(s, t); }
    /// Companion angle with sin(phi) = t/|tau|, cos(phi) = s/|tau|; 0 at tau = 0.
    double phi() const { return (t == 0.0 && s == 0.0) ? 0.0 : std::atan2(t, s); }
};

enum class Beta : int { real = 1, complex = 2 };

inline double beta_value(Beta b) { return static_cast<double>(static_cast<int>(b)); }

struct TheoryContext {
    BesselPolicy bessel{};
    /// Quadrature rule for the real-axis correction integral (real case only).
    const DiskGrid* grid = &default_disk_grid();
};

/// Per-term breakdown of e(tau) * N, i.e. of the mean of the linear statistic.
struct ExpectationTerms {
    double leading = 0.0;    ///< 2N J_1(|tau|)/|tau|
    double laplacian = 0.0;  ///< -|tau| J_1(|tau|)/4
    double kappa4 = 0.0;     ///< 2 kappa4 J_3(|tau|)/|tau|
    double real_axis = 0.0;  ///< I(t,s) - J_0(|tau|) + J_0(t)/2 + cos(t)/2 (real case)

    double total() const { return leading + laplacian + kappa4 + real_axis; }
};

/// Per-term breakdown of v(tau), the variance of the linear statistic.
struct VarianceTerms {
    double gradient = 0.0;   ///< |tau|^2 / 4
    double series = 0.0;     ///< boundary Fourier series
    double kappa4 = 0.0;     ///< kappa4 (2 J_1/|tau| - J_0)^2
    double real_ramp = 0.0;  ///< (t^2 - s^2) J_1(2s) / (4s) (real case)

    double total() const { return gradient + series + kappa4 + real_ramp; }
};

struct TheoryPrediction {
    ComplexTime tau;
    long n = 0;
    double e_value = 0.0;  ///< mean of the linear statistic divided by N
    double v_value = 0.0;  ///< variance of the linear statistic
    double k_total = 0.0;  ///< e^2 + v / N^2
    double disconnected = 0.0;
    double connected = 0.0;
    ExpectationTerms e_terms;
    VarianceTerms v_terms;
    /// |tau| beyond N^(2/7), where the asymptotics are no longer proven.
    bool validity_warning = false;
};

namespace detail {

// J_1(x)/x with the removable value 1/2 at 0.
inline double j1_over_x(double x, const BesselPolicy& policy) {
    if (x < 1e-4) return 0.5 - x * x / 16.0;
    return bessel_j(1, x, policy) / x;
}

// J_3(x)/x, which vanishes like x^2/48 at 0.
inline double j3_over_x(double x, const BesselPolicy& policy) {
    if (x < 1e-4) return x * x / 48.0;
    return bessel_j(3, x, policy) / x;
}

// (t^2 - s^2) J_1(2s) / (4s); the s -> 0 limit is t^2 / 4.
inline double real_ramp_term(double t, double s, const BesselPolicy& policy) {
    const double as = std::abs(s);
    const double ratio = 0.5 * j1_over_x(2.0 * as, policy);  // J_1(2s) / (4s) = J_1(2s)/(2s) / 2
    return (t * t - s * s) * ratio;
}

}  // namespace detail

/// Squared mismatch between the disk average and the boundary average of
/// f_tau, the coefficient of kappa4 in the variance.
inline double kappa4_variance_coefficient(double abs_tau, const BesselPolicy& policy = {}) {
    const double c = 2.0 * detail::j1_over_x(abs_tau, policy) - bessel_j(0, abs_tau, policy);
    return c * c;
}

inline ExpectationTerms expectation_terms(const ComplexTime& tau, long n, double kappa4, Beta beta,
                                          const TheoryContext& ctx = {}) {
    if (n < 1) throw InvalidArgument("expectation_linear_stat: N must be >= 1");
    const double x = tau.abs_tau();
    const double nd = static_cast<double>(n);
    ExpectationTerms terms;
    terms.leading = 2.0 * nd * detail::j1_over_x(x, ctx.bessel);
    terms.laplacian = -x * x * detail::j1_over_x(x, ctx.bessel) / 4.0;
    terms.kappa4 = 2.0 * kappa4 * detail::j3_over_x(x, ctx.bessel);
    if (beta == Beta::real) {
        const double correction = real_axis_correction_integral(tau.t, tau.s, *ctx.grid);
        terms.real_axis = correction - bessel_j(0, x, ctx.bessel) +
                          0.5 * bessel_j(0, std::abs(tau.t), ctx.bessel) + 0.5 * std::cos(tau.t);
    }
    return terms;
}

/// Mean of sum_i f_tau(sigma_i).
inline double expectation_linear_stat(const ComplexTime& tau, long n, double kappa4, Beta beta,
                                      const TheoryContext& ctx = {}) {
    return expectation_terms(tau, n, kappa4, beta, ctx).total();
}

inline VarianceTerms variance_terms(const ComplexTime& tau, double kappa4, Beta beta,
                                    const TheoryContext& ctx = {}) {
    const double x = tau.abs_tau();
    VarianceTerms terms;
    terms.gradient = x * x / 4.0;
    terms.kappa4 = kappa4 * kappa4_variance_coefficient(x, ctx.bessel);
    if (beta == Beta::complex) {
        terms.series = 0.5 * weighted_bessel_series(x, BesselWeight::abs_k(), ctx.bessel);
    } else {
        // |Fourier coefficient of the conjugation-symmetrized f_tau on the
        // circle|^2 is J_k^2 sin^2(phi k) for odd k and J_k^2 cos^2(phi k)
        // for even k.
        terms.series = weighted_bessel_series(x, BesselWeight::abs_k_sym(tau.phi()), ctx.bessel);
        terms.real_ramp = detail::real_ramp_term(tau.t, tau.s, ctx.bessel);
    }
    return terms;
}

/// Variance of sum_i f_tau(sigma_i).
inline double variance_linear_stat(const ComplexTime& tau, double kappa4, Beta beta,
                                   const TheoryContext& ctx = {}) {
    return variance_terms(tau, kappa4, beta, ctx).total();
}

inline TheoryPrediction dsff_theory(const ComplexTime& tau, long n, double kappa4, Beta beta,
                                    const TheoryContext& ctx = {}) {
    TheoryPrediction p;
    p.tau = tau;
    p.n = n;
    p.e_terms = expectation_terms(tau, n, kappa4, beta, ctx);
    p.v_terms = variance_terms(tau, kappa4, beta, ctx);
    const double nd = static_cast<double>(n);
    p.e_value = p.e_terms.total() / nd;
    p.v_value = p.v_terms.total();
    p.disconnected = p.e_value * p.e_value;
    p.connected = p.v_value / (nd * nd);
    p.k_total = p.disconnected + p.connected;
    p.validity_warning = tau.abs_tau() > std::pow(nd, 2.0 / 7.0);
    return p;
}

/// 4 J_1(|tau|)^2/|tau|^2 + (|tau|^2/4 + (t^2 - s^2)(2/beta - 1) J_1(2s)/(4s)) / N^2.
inline double dsff_simplified(const ComplexTime& tau, long n, Beta beta,
                              const BesselPolicy& policy = {}) {
    const double x = tau.abs_tau();
    if (!(x > 0.0)) throw InvalidArgument("dsff_simplified: requires |tau| > 0");
    if (n < 1) throw InvalidArgument("dsff_simplified: N must be >= 1");
    const double nd = static_cast<double>(n);
    const double ratio = detail::j1_over_x(x, policy);
    const double aniso = (2.0 / beta_value(beta) - 1.0) * detail::real_ramp_term(tau.t, tau.s, policy);
    return 4.0 * ratio * ratio + (x * x / 4.0 + aniso) / (nd * nd);
}

/// Exact complex Ginibre DSFF split into the contact level 1/N, the
/// disconnected 4 J_1^2/|tau|^2 and the connected (1 - e^{-|tau|^2/4N})/N.
/// The connected part here includes the contact level, matching what the
/// sample variance of the linear statistic measures, so
/// k_total = disconnected + connected.
struct GinibreDsff {
    double contact = 0.0;
    double disconnected = 0.0;
    double connected = 0.0;
    double k_total = 0.0;
};

inline GinibreDsff ginibre_exact_dsff(const ComplexTime& tau, long n, const BesselPolicy& policy = {}) {
    if (n < 1) throw InvalidArgument("ginibre_exact_dsff: N must be >= 1");
    const double x = tau.abs_tau();
    const double nd = static_cast<double>(n);
    const double ratio = detail::j1_over_x(x, policy);
    GinibreDsff g;
    g.contact = 1.0 / nd;
    g.disconnected = 4.0 * ratio * ratio;
    g.connected = -std::expm1(-x * x / (4.0 * nd)) / nd;
    g.k_total = g.disconnected + g.connected;
    return g;
}

struct Timescales {
    double tau_edge = 0.0;  ///< N^(2/5), dip between disconnected decay and ramp
    double tau_hei = 0.0;   ///< N^(1/2), inverse mean eigenvalue spacing
};

inline Timescales timescales(long n) {
    if (n < 1) throw InvalidArgument("timescales: N must be >= 1");
    const double nd = static_cast<double>(n);
    return {std::pow(nd, 0.4), std::sqrt(nd)};
}

}  // namespace dsff
