#include "delayflux/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "delayflux/errors.hpp"

namespace delayflux {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

}  // namespace

void PhysicalParams::validate() const {
    require(std::isfinite(D) && D > 0.0, "D must be positive");
    require(std::isfinite(k) && k > 0.0, "k must be positive");
    require(std::isfinite(A) && A > 0.0, "A must be positive");
    require(std::isfinite(P0) && P0 > 0.0, "P0 must be positive");
    require(std::isfinite(m) && m > 0.0, "m must be positive");
    require(std::isfinite(T0) && T0 >= 0.0, "T0 must be nonnegative");
}

void ModelParams::validate() const {
    require(std::isfinite(alpha) && alpha > 0.0, "alpha must be positive");
    require(std::isfinite(m) && m > 0.0, "m must be positive");
    require(std::isfinite(tau) && tau >= 0.0, "tau must be nonnegative");
}

ModelParams nondimensionalize(const PhysicalParams& p) {
    p.validate();
    return ModelParams{p.A / (p.P0 * std::sqrt(p.D * p.k)), p.m, p.k * p.T0};
}

double steady_state_c(double alpha, double m) {
    ModelParams{alpha, m, 0.0}.validate();
    const auto residual = [&](double c) { return c + std::pow(c, m + 1.0) - alpha; };

    // c^{m+1} < alpha also bounds the root, which is much tighter for large alpha.
    double lo = 0.0;
    double hi = std::min(alpha, std::pow(alpha, 1.0 / (m + 1.0)));
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        if (residual(mid) > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    double c = 0.5 * (lo + hi);
    for (int i = 0; i < 5; ++i) {
        const double slope = 1.0 + (m + 1.0) * std::pow(c, m);
        const double next = c - residual(c) / slope;
        if (!(next > 0.0)) break;
        if (next >= alpha) {
            // alpha^{m+1} is below one ulp of alpha: the root rounds to alpha.
            c = std::nextafter(alpha, 0.0);
            break;
        }
        c = next;
    }
    return c;
}

double feedback_gain(double alpha, double m, double c) {
    const double cm = std::pow(c, m);
    return m * alpha * std::pow(c, m - 1.0) / ((1.0 + cm) * (1.0 + cm));
}

double boundary_flux(double q0, double alpha, double m) {
    // Negative boundary values can appear transiently in coarse runs; the Hill
    // law is only defined for q0 >= 0, so clamp there.
    return -alpha / (1.0 + std::pow(std::max(q0, 0.0), m));
}

double boundary_flux_slope(double q0, double alpha, double m) {
    if (q0 <= 0.0) {
        return m == 1.0 ? alpha : (m > 1.0 ? 0.0 : INFINITY);
    }
    const double qm = std::pow(q0, m);
    return alpha * m * std::pow(q0, m - 1.0) / ((1.0 + qm) * (1.0 + qm));
}

double asymptotic_gain(double alpha, double m) {
    ModelParams{alpha, m, 0.0}.validate();
    if (alpha > 1.0) return m * (alpha - 1.0) / alpha;
    const double am = std::pow(alpha, m);
    return m * am / ((1.0 + am) * (1.0 + am));
}

LowerSolutionShape LowerSolutionShape::defaults() {
    const double beta = 1.01;
    return LowerSolutionShape{std::sqrt(2.0 * beta + 1.0), beta, 2.0};
}

void LowerSolutionShape::validate() const {
    require(gamma >= 2.0, "lower solution requires gamma >= 2");
    require(beta > 1.0, "lower solution requires beta > 1");
    // Relative slack so the default zeta = sqrt(2 beta + 1) passes after rounding.
    const double bound = std::sqrt(beta * gamma * (gamma - 1.0) + 1.0);
    require(zeta >= bound * (1.0 - 1e-14), "lower solution requires zeta >= sqrt(beta gamma (gamma-1) + 1)");
}

double lower_solution(double x, double alpha, double m, const LowerSolutionShape& shape) {
    shape.validate();
    const double c = steady_state_c(alpha, m);
    return c * std::exp(-shape.zeta * x - shape.beta * std::pow(x, shape.gamma));
}

SteadyState SteadyState::of(double alpha, double m) {
    const double c = steady_state_c(alpha, m);
    return SteadyState{c, feedback_gain(alpha, m, c)};
}

double SteadyState::profile(double x) const { return c * std::exp(-x); }

}  // namespace delayflux
