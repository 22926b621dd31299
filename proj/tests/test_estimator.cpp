#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dsff/estimator.hpp"
#include "oracle.hpp"

using namespace dsff;

namespace {

SpectrumSet synthetic_set(const std::vector<std::vector<std::complex<double>>>& spectra) {
    SpectrumSet set;
    set.spec = {Field::complex, Distribution::gaussian, static_cast<long>(spectra.front().size())};
    for (std::size_t i = 0; i < spectra.size(); ++i) set.samples.push_back({spectra[i], i});
    return set;
}

}  // namespace

TEST(LinearStat, TrivialCases) {
    const std::vector<std::complex<double>> eigs{{0.1, 0.2}, {-0.3, 0.4}, {0.5, -0.6}};
    EXPECT_EQ(linear_stat(eigs, {}), std::complex<double>(3.0, 0.0));
    const std::vector<std::complex<double>> pair{{0, 1}, {0, -1}};
    EXPECT_LT(std::abs(linear_stat(pair, {0.0, std::numbers::pi / 2})), 1e-15);
}

TEST(LinearStat, DoubleSumIdentity) {
    std::mt19937_64 eng(3);
    std::normal_distribution<double> g;
    for (std::size_t n : {5u, 17u, 64u}) {
        std::vector<std::complex<double>> eigs(n);
        for (auto& z : eigs) z = {g(eng) * 0.5, g(eng) * 0.5};
        for (auto [t, s] : {std::pair{0.3, 1.1}, std::pair{-4.0, 2.5}, std::pair{9.0, 0.0}}) {
            const auto l = linear_stat(eigs, {t, s});
            EXPECT_NEAR(std::norm(l) / (n * static_cast<double>(n)), oracle::double_sum_dsff(eigs, t, s), 1e-14);
            EXPECT_LE(std::abs(l), static_cast<double>(n) + 1e-12);
        }
    }
}

TEST(LinearStat, PermutationInvariantBitwise) {
    std::mt19937_64 eng(4);
    std::normal_distribution<double> g;
    std::vector<std::complex<double>> eigs(50);
    for (auto& z : eigs) z = {g(eng), g(eng)};
    const auto ref = linear_stat(eigs, {3.3, -1.7});
    for (int r = 0; r < 5; ++r) {
        std::shuffle(eigs.begin(), eigs.end(), eng);
        const auto l = linear_stat(eigs, {3.3, -1.7});
        EXPECT_EQ(l.real(), ref.real());
        EXPECT_EQ(l.imag(), ref.imag());
    }
}

TEST(Estimate, TauZero) {
    const auto set = sample_spectra({Field::real, Distribution::gaussian, 12}, 7, 2);
    const auto e = dsff_point(set, {});
    EXPECT_EQ(e.k_mean, 1.0);
    EXPECT_EQ(e.k_stderr, 0.0);
    EXPECT_EQ(e.connected, 0.0);
    EXPECT_EQ(e.disconnected_unbiased, 1.0);
    EXPECT_DOUBLE_EQ(e.contact, 1.0 / 12.0);
    EXPECT_EQ(e.m, 7u);
    EXPECT_EQ(e.n, 12);
    EXPECT_TRUE(e.decomposition_available);
}

TEST(Estimate, SinglePointSpectra) {
    std::vector<std::vector<std::complex<double>>> spectra(6, {{0.3, -0.2}});
    const auto set = synthetic_set(spectra);
    for (auto tau : {ComplexTime{1.0, 2.0}, ComplexTime{-7.0, 0.5}}) {
        const auto e = dsff_point(set, tau);
        EXPECT_NEAR(e.k_mean, 1.0, 1e-15);
    }
}

TEST(Estimate, SingleSampleHasNoDecomposition) {
    const auto set = sample_spectra({Field::complex, Distribution::gaussian, 8}, 1, 2);
    const auto e = dsff_point(set, {1.0, 1.0});
    EXPECT_FALSE(e.decomposition_available);
    EXPECT_TRUE(std::isnan(e.connected));
    EXPECT_TRUE(std::isnan(e.disconnected_unbiased));
    EXPECT_EQ(e.k_stderr, 0.0);
    EXPECT_NEAR(e.k_mean, std::norm(linear_stat(set.samples[0], {1.0, 1.0})) / 64.0, 1e-15);
}

TEST(Estimate, AlgebraicIdentity) {
    const auto set = sample_spectra({Field::complex, Distribution::gaussian, 20}, 30, 6);
    const ComplexTime tau{2.0, 1.0};
    std::vector<std::complex<double>> ls;
    for (const auto& s : set.samples) ls.push_back(linear_stat(s, tau));
    const auto e = estimate_from_linear_stats(tau, ls, 20);
    const double m = 30.0, nn = 400.0;
    // (1/M) sum |L|^2 = |Lbar|^2 + (M-1)/M S^2, in the estimator's own terms.
    const double lbar2 = (e.disconnected_unbiased + e.connected / m) * nn;
    const double s2 = e.connected * nn;
    EXPECT_NEAR(e.k_mean * nn / (lbar2 + (m - 1.0) / m * s2), 1.0, 1e-12);
    EXPECT_THROW(estimate_from_linear_stats(tau, {}, 20), InvalidArgument);
}

TEST(Estimate, UnbiasedOnSyntheticGaussian) {
    // L_m ~ mu + CN(0, sigma^2): E disconnected = |mu|^2/N^2, E connected = sigma^2/N^2.
    const std::complex<double> mu(3.0, -1.0);
    const double sigma2 = 4.0;
    const long n = 10;
    const std::size_t m = 20, reps = 10000;
    std::mt19937_64 eng(12);
    std::normal_distribution<double> g(0.0, std::sqrt(sigma2 / 2.0));
    std::vector<double> disc, conn;
    std::vector<std::complex<double>> ls(m);
    for (std::size_t r = 0; r < reps; ++r) {
        for (auto& l : ls) l = mu + std::complex<double>(g(eng), g(eng));
        const auto e = estimate_from_linear_stats({1.0, 0.0}, ls, n);
        disc.push_back(e.disconnected_unbiased);
        conn.push_back(e.connected);
    }
    auto check = [&](const std::vector<double>& v, double expected) {
        double mean = 0.0, var = 0.0;
        for (double x : v) mean += x;
        mean /= v.size();
        for (double x : v) var += (x - mean) * (x - mean);
        var /= v.size() - 1;
        EXPECT_LT(std::abs(mean - expected), 5.0 * std::sqrt(var / v.size()));
    };
    check(disc, std::norm(mu) / 100.0);
    check(conn, sigma2 / 100.0);
}

TEST(Estimate, StandardErrors) {
    const auto set = sample_spectra({Field::complex, Distribution::gaussian, 16}, 40, 1);
    const ComplexTime tau{3.0, 0.0};
    const auto e = dsff_point(set, tau);
    std::vector<double> d;
    for (const auto& s : set.samples) d.push_back(std::norm(linear_stat(s, tau)) / 256.0);
    double mean = 0.0, var = 0.0;
    for (double x : d) mean += x;
    mean /= 40.0;
    for (double x : d) var += (x - mean) * (x - mean);
    var /= 39.0;
    EXPECT_NEAR(e.k_mean, mean, 1e-15);
    EXPECT_NEAR(e.k_stderr, std::sqrt(var / 40.0), 1e-15);
    EXPECT_GT(e.connected_stderr, 0.0);
}

TEST(Estimate, ConjugationCovariance) {
    const auto set = sample_spectra({Field::real, Distribution::gaussian, 32}, 20, 4);
    for (auto [t, s] : {std::pair{1.0, 2.0}, std::pair{5.0, 0.7}}) {
        const auto a = dsff_point(set, {t, s});
        const auto b = dsff_point(set, {t, -s});
        EXPECT_NEAR(a.k_mean, b.k_mean, 1e-12);
        EXPECT_NEAR(a.connected, b.connected, 1e-12);
    }
}

TEST(Grid, EmptyAndSingle) {
    const auto set = sample_spectra({Field::complex, Distribution::gaussian, 8}, 5, 1);
    EXPECT_TRUE(dsff_grid(set, std::vector<ComplexTime>{}).empty());
    const ComplexTime one[] = {{0.7, -0.2}};
    const auto g = dsff_grid(set, one);
    const auto p = dsff_point(set, one[0]);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g[0].k_mean, p.k_mean);
    EXPECT_EQ(g[0].connected, p.connected);
}

TEST(Grid, WorkerIndependent) {
    const auto set = sample_spectra({Field::complex, Distribution::gaussian, 16}, 9, 1);
    const auto taus = build_tau_grid(0.4, 0.1, 10.0, 25, Spacing::log);
    const auto a = dsff_grid(set, taus, 1);
    const auto b = dsff_grid(set, taus, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].k_mean, b[i].k_mean);
        EXPECT_EQ(a[i].connected_stderr, b[i].connected_stderr);
    }
}

TEST(TauGrid, Examples) {
    const auto a = build_tau_grid(0.0, 1.0, 1.0, 1, Spacing::linear);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0].t, 1.0);
    EXPECT_EQ(a[0].s, 0.0);

    const auto b = build_tau_grid(std::numbers::pi / 2, 2.0, 2.0, 1, Spacing::linear);
    EXPECT_NEAR(b[0].t, 0.0, 1e-15);
    EXPECT_NEAR(b[0].s, 2.0, 1e-15);

    const auto c = build_tau_grid(0.0, 0.1, 30.0, 4, Spacing::log);
    ASSERT_EQ(c.size(), 4u);
    const double r = std::cbrt(300.0);
    EXPECT_NEAR(c[0].t, 0.1, 1e-15);
    EXPECT_NEAR(c[1].t, 0.1 * r, 1e-13);
    EXPECT_NEAR(c[2].t, 0.1 * r * r, 1e-13);
    EXPECT_EQ(c[3].t, 30.0);

    const auto lin = build_tau_grid(0.0, 0.0, 1.0, 5, Spacing::linear);
    EXPECT_EQ(lin[0].t, 0.0);
    EXPECT_DOUBLE_EQ(lin[2].t, 0.5);
}

TEST(TauGrid, Errors) {
    EXPECT_THROW(build_tau_grid(0.0, 2.0, 1.0, 4, Spacing::linear), InvalidArgument);
    EXPECT_THROW(build_tau_grid(0.0, 0.0, 1.0, 4, Spacing::log), InvalidArgument);
    EXPECT_THROW(build_tau_grid(0.0, 1.0, 2.0, 0, Spacing::log), InvalidArgument);
    EXPECT_THROW(build_tau_grid(0.0, -1.0, 2.0, 3, Spacing::linear), InvalidArgument);
}
