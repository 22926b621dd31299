#pragma once

// Fixed-rule quadrature over the unit disk, its boundary circle and the
// real chord [-1, 1]. These rules serve as oracles for the closed forms in
// theory.hpp and also evaluate the one real-ensemble integral that has no
// closed form.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "dsff/error.hpp"
#include "dsff/summation.hpp"

namespace dsff {

namespace detail {

// (P_n(x), P_{n-1}(x)) by the three-term recurrence.
inline std::pair<double, double> legendre_pair(std::size_t n, double x) {
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
    }
    return {p1, p0};
}

}  // namespace detail

/// Gauss-Legendre nodes and weights on [-1, 1], ascending nodes.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n) {
    if (n == 0) throw InvalidArgument("gauss_legendre: need at least one node");
    std::vector<double> nodes(n), weights(n);
    const double nd = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [pn, pm] = detail::legendre_pair(n, x);
            const double dx = pn / (nd * (x * pn - pm) / (x * x - 1.0));
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const auto [pn, pm] = detail::legendre_pair(n, x);
        const double dp = nd * (x * pn - pm) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
    return {std::move(nodes), std::move(weights)};
}

/// Product rule on the open unit disk: Gauss-Legendre in r on (0, 1) with the
/// Jacobian r folded into the weights, equispaced midpoints in theta.
/// With an even angular count the node set is symmetric under y -> -y and
/// x -> -x, and no node lies on the real axis.
class DiskGrid {
public:
    struct Node {
        double r, theta, x, y, w;
    };

    DiskGrid(std::size_t radial_nodes, std::size_t angular_nodes)
        : radial_(radial_nodes), angular_(angular_nodes) {
        if (radial_nodes == 0 || angular_nodes == 0)
            throw InvalidArgument("DiskGrid: radial and angular node counts must be positive");
        const auto [gx, gw] = gauss_legendre(radial_nodes);
        const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(angular_nodes);
        nodes_.reserve(radial_nodes * angular_nodes);
        for (std::size_t i = 0; i < radial_nodes; ++i) {
            const double r = 0.5 * (gx[i] + 1.0);
            const double wr = 0.5 * gw[i] * r;
            for (std::size_t j = 0; j < angular_nodes; ++j) {
                const double theta = dtheta * (static_cast<double>(j) + 0.5);
                nodes_.push_back({r, theta, r * std::cos(theta), r * std::sin(theta), wr * dtheta});
            }
        }
    }

    std::size_t radial_nodes() const noexcept { return radial_; }
    std::size_t angular_nodes() const noexcept { return angular_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }

    /// True when reflections across both axes map the node set onto itself.
    bool reflection_symmetric() const noexcept { return angular_ % 2 == 0; }

    /// Same rule with both node counts doubled.
    DiskGrid refined() const { return DiskGrid(2 * radial_, 2 * angular_); }

private:
    std::size_t radial_;
    std::size_t angular_;
    std::vector<Node> nodes_;
};

/// Grid used for acceptance-level accuracy.
inline const DiskGrid& default_disk_grid() {
    static const DiskGrid grid(400, 512);
    return grid;
}

/// Integral of f(x, y) over the unit disk with respect to dx dy.
template <class F>
std::complex<double> disk_integral(F&& f, const DiskGrid& grid) {
    ComplexCompensatedSum sum;
    for (const auto& node : grid.nodes()) {
        sum.add(node.w * std::complex<double>(f(node.x, node.y)));
    }
    return sum.value();
}

/// (1 / 2pi) times the integral of f(theta) over [0, 2pi), by the
/// equispaced rule at theta_j = 2 pi j / n.
template <class F>
std::complex<double> boundary_average(F&& f, std::size_t n_nodes) {
    if (n_nodes == 0) throw InvalidArgument("boundary_average: n_nodes must be positive");
    ComplexCompensatedSum sum;
    const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(n_nodes);
    for (std::size_t j = 0; j < n_nodes; ++j) {
        sum.add(std::complex<double>(f(dtheta * static_cast<double>(j))));
    }
    return sum.value() / static_cast<double>(n_nodes);
}

/// (1 / 2pi) * int_{-1}^{1} e^{itx} / sqrt(1 - x^2) dx by Chebyshev-Gauss.
/// The sine part cancels pairwise on the symmetric nodes.
inline double chord_integral(double t, std::size_t n_nodes) {
    if (n_nodes == 0) throw InvalidArgument("chord_integral: n_nodes must be positive");
    CompensatedSum<double> sum;
    const double n = static_cast<double>(n_nodes);
    for (std::size_t j = 1; j <= n_nodes; ++j) {
        const double x = std::cos((2.0 * static_cast<double>(j) - 1.0) * std::numbers::pi / (2.0 * n));
        sum.add(std::cos(t * x));
    }
    return sum.value() / (2.0 * n);
}

/// (1 / 4pi) * int_D e^{itx} (1 - e^{isy}) / y^2 dx dy.
///
/// Only the part even in both x and y survives on the symmetric domain, so
/// the integrand is cos(tx) (1 - cos(sy)) / y^2, written as
/// s^2 * sinc^2(sy / 2) / 2 to stay accurate for small |sy|.
inline double real_axis_correction_integral(double t, double s, const DiskGrid& grid) {
    if (!grid.reflection_symmetric())
        throw InvalidArgument("real_axis_correction_integral: grid must be symmetric under "
                              "reflection across both axes (even angular node count)");
    if (s == 0.0) return 0.0;
    CompensatedSum<double> sum;
    for (const auto& node : grid.nodes()) {
        const double half = 0.5 * s * node.y;
        const double sinc = half == 0.0 ? 1.0 : std::sin(half) / half;
        sum.add(node.w * std::cos(t * node.x) * 0.5 * sinc * sinc);
    }
    return s * s * sum.value() / (4.0 * std::numbers::pi);
}

}  // namespace dsff
