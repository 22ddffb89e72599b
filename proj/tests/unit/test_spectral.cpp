#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "delayflux/errors.hpp"
#include "delayflux/model.hpp"
#include "delayflux/spectral.hpp"

using namespace delayflux;
using doctest::Approx;

namespace {
// Gains as printed for the two oscillatory examples.
const double kQ3 = 1.5941;
const double kQ4 = 4.5484;

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> g;
    for (int i = 0; lo + i * step <= hi + 1e-12; ++i) g.push_back(lo + i * step);
    return g;
}
}  // namespace

TEST_CASE("characteristic residual") {
    CHECK(char_residual(-2.0, 0, 0, 2.0, Branch::Positive).norm() == 0.0);
    CHECK(char_residual(1, 0, 0, 1, Branch::Negative).norm() == 0.0);
    const double t0 = hopf_tau0(kQ3);
    const auto cp = crossing_pair(kQ3);
    CHECK(char_residual(cp.a0, cp.b0, t0, kQ3, Branch::Positive).norm() < 1e-8);
    CHECK(char_residual(-cp.a0, -cp.b0, t0, kQ3, Branch::Negative).norm() < 1e-8);
    CHECK(cp.a0 * cp.a0 - cp.b0 * cp.b0 - 1.0 == Approx(0.0).epsilon(1e-14));
}

TEST_CASE("analytic derivative matches finite differences") {
    const std::complex<double> rho(1.2, 0.4), h(1e-6, 0);
    for (auto br : {Branch::Positive, Branch::Negative}) {
        const auto F = [&](std::complex<double> r) {
            const auto res = char_residual(r.real(), r.imag(), 0.8, 1.7, br);
            return std::complex<double>(res.re, res.im);
        };
        const auto fd = (F(rho + h) - F(rho - h)) / (2.0 * h.real());
        const auto an = char_derivative(rho, 0.8, 1.7, br);
        CHECK(std::abs(fd - an) < 1e-7);
    }
}

TEST_CASE("Hopf bracket") {
    auto b = hopf_bracket(kQ4);
    CHECK(b.lo == Approx(0.07601696618).epsilon(1e-9));
    CHECK(b.hi == Approx(0.1520339324).epsilon(1e-9));
    b = hopf_bracket(std::pow(1 + std::numbers::pi * std::numbers::pi, 0.25));
    CHECK(b.lo == Approx(0.5).epsilon(1e-12));
    CHECK(b.hi == Approx(1.0).epsilon(1e-12));
    b = hopf_bracket(kQ3);
    CHECK(b.lo == Approx(0.6723947089).epsilon(1e-9));
    CHECK(b.hi == Approx(1.344789418).epsilon(1e-9));
    CHECK_THROWS_AS(hopf_bracket(1.0), DomainError);
    CHECK_THROWS_AS(hopf_bracket(0.5), DomainError);
}

TEST_CASE("Hopf threshold") {
    CHECK(hopf_tau0(kQ3) == Approx(1.09515847007).epsilon(1e-10));
    CHECK(hopf_tau0(kQ4) == Approx(0.115195521378).epsilon(1e-10));
    CHECK(hopf_tau0(10) == Approx(0.0236131264211).epsilon(1e-10));
    CHECK(hopf_tau0(3) == Approx(0.269654704333).epsilon(1e-10));
    CHECK_THROWS_AS(hopf_tau0(0.9), DomainError);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uq(1.01, 20.0);
    for (int i = 0; i < 100; ++i) {
        const double Q = uq(rng);
        const double t0 = hopf_tau0(Q);
        const double w = std::sqrt(Q * Q * Q * Q - 1);
        const auto b = hopf_bracket(Q);
        REQUIRE(b.hi == 2.0 * b.lo);
        REQUIRE(std::abs(std::tan(t0 * w) + std::sqrt(Q * Q - 1) / std::sqrt(Q * Q + 1)) <= 1e-9);
        REQUIRE(std::abs(t0 - hopf_tau0_closed_form(Q)) <= 1e-9);
        REQUIRE(t0 > b.lo);
        REQUIRE(t0 < b.hi);
    }
}

TEST_CASE("crossing pair and speed") {
    auto cp = crossing_pair(1.0);
    CHECK(cp.a0 == Approx(1.0));
    CHECK(cp.b0 == Approx(0.0));
    cp = crossing_pair(std::sqrt(3.0));
    CHECK(cp.a0 == Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(cp.b0 == Approx(1.0).epsilon(1e-14));
    cp = crossing_pair(kQ3);
    CHECK(cp.a0 == Approx(1.3306305).epsilon(1e-7));
    CHECK(cp.b0 == Approx(0.87782538).epsilon(1e-7));

    struct Row { double Q, speed; };
    for (auto r : {Row{1.1, 0.00775738804}, Row{kQ3, 0.3001886003}, Row{std::sqrt(3.0), 0.4806526359},
                   Row{3, 6.240774254}, Row{kQ4, 35.31980629}, Row{10, 854.7015093}}) {
        CHECK(crossing_speed(r.Q, hopf_tau0(r.Q)) == Approx(r.speed).epsilon(1e-8));
    }
}

TEST_CASE("crossing speed agrees with the tracked root") {
    for (double Q : {kQ3, 3.0, kQ4}) {
        const double t0 = hopf_tau0(Q);
        const double h = 1e-5 * t0;
        const std::vector<double> g = {0.5 * t0, t0 - h, t0 + h};
        const auto roots = track_rightmost_root(Q, g);
        const double fd = (roots[2].lambda_re - roots[1].lambda_re) / (2 * h);
        CHECK(fd == Approx(crossing_speed(Q, t0)).epsilon(1e-5));
        CHECK(roots[1].lambda_im == Approx(std::sqrt(Q * Q * Q * Q - 1)).epsilon(1e-4));
    }
}

TEST_CASE("continuation") {
    const auto sub = track_rightmost_root(0.5, grid(0, 20, 0.05));
    CHECK(sub.front().b == 0.0);
    CHECK(sub.front().a == Approx(-0.5));
    CHECK_FALSE(sub.front().on_branch);
    for (const auto& r : sub) REQUIRE(r.lambda_re < 0.0);

    const double t0 = hopf_tau0(kQ3);
    const auto roots = track_rightmost_root(kQ3, grid(0.5, 2.0, 1e-3));
    int flips = 0;
    for (std::size_t i = 1; i < roots.size(); ++i) {
        if (roots[i - 1].lambda_re < 0 && roots[i].lambda_re >= 0) {
            ++flips;
            CHECK(roots[i - 1].tau <= t0);
            CHECK(roots[i].tau >= t0);
        }
        REQUIRE(roots[i].converged);
    }
    CHECK(flips == 1);

    const auto neg = track_rightmost_root(kQ3, std::vector<double>{0.0, t0});
    CHECK(neg[0].a == Approx(-kQ3));
    const auto nb = track_rightmost_root(kQ3, std::vector<double>{0.0, t0}, Branch::Negative);
    CHECK(nb[0].a == Approx(kQ3));
    CHECK(nb[1].a < 0.0);
    CHECK(nb[1].lambda_re == Approx(neg[1].lambda_re).epsilon(1e-9));
}

TEST_CASE("classify") {
    CHECK(classify(0.4, 4, 15).regime == Regime::StableAllDelays);
    CHECK_FALSE(classify(0.4, 4, 15).tau0.has_value());
    CHECK(classify(1.5, 4, 1.5).regime == Regime::OscillatoryAboveThreshold);
    CHECK(classify(1.5, 4, 0.5).regime == Regime::StableBelowThreshold);
    CHECK(classify(2, 2, 3).regime == Regime::Marginal);
    for (double m : {5.0, 50.0, 500.0}) {
        for (double a : {0.2, 0.4, 0.6, 0.9}) CHECK(classify(a, m, 3).regime == Regime::StableAllDelays);
    }
    // At alpha = 1 the gain grows like ln m, so the remark needs alpha strictly below 1.
    CHECK(SteadyState::of(1.0, 5).Q == Approx(1.10955200661).epsilon(1e-10));
    double prev = 1e9;
    for (double m : {6.0, 12.0, 24.0, 48.0}) {
        const double t0 = *classify(5, m, 1).tau0;
        CHECK(t0 < prev);
        prev = t0;
    }
    const auto h = HopfAnalysis::of(kQ3);
    CHECK(2 * std::numbers::pi / h.omega == Approx(2.6895788).epsilon(1e-7));
    CHECK(2 * std::numbers::pi / HopfAnalysis::of(kQ4).omega == Approx(0.30406786).epsilon(1e-7));
}
