#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace delayflux {

/// Which half-plane representation of the eigenfunction the root belongs to.
/// Positive: phi = A e^{-rho x}, Re rho > 0, F_p(rho) = rho + Q e^{-(rho^2-1) tau}.
/// Negative: phi = B e^{rho x},  Re rho < 0, F_n(rho) = rho - Q e^{-(rho^2-1) tau}.
enum class Branch { Positive, Negative };

struct Residual {
    double re = 0.0;
    double im = 0.0;

    double norm() const;
};

/// Real and imaginary parts of F_p or F_n at rho = a + i b.
Residual char_residual(double a, double b, double tau, double Q, Branch branch);

/// dF/drho, from which the 2x2 real Jacobian follows by Cauchy-Riemann.
std::complex<double> char_derivative(std::complex<double> rho, double tau, double Q, Branch branch);

struct CharRoot {
    double tau = 0.0;
    double a = 0.0;
    double b = 0.0;
    double lambda_re = 0.0;  // a^2 - b^2 - 1
    double lambda_im = 0.0;  // 2ab
    Branch branch = Branch::Positive;
    bool on_branch = true;   // sign of a matches the branch
    bool converged = true;

    static CharRoot from_rho(double tau, std::complex<double> rho, Branch branch, bool converged);
};

struct HopfBracket {
    double lo = 0.0;
    double hi = 0.0;
};

/// (pi / (2 omega), pi / omega) with omega = sqrt(Q^4 - 1). Requires Q > 1.
HopfBracket hopf_bracket(double Q);

/// Threshold delay by bisection of tan(tau omega) + sqrt(Q^2-1)/sqrt(Q^2+1)
/// inside hopf_bracket(Q).
double hopf_tau0(double Q);

/// (pi - atan(sqrt(Q^2-1)/sqrt(Q^2+1))) / omega.
double hopf_tau0_closed_form(double Q);

struct CrossingPair {
    double a0 = 0.0;
    double b0 = 0.0;
};

/// Intersection of a^2 + b^2 = Q^2 with a^2 - b^2 = 1 in the first quadrant.
CrossingPair crossing_pair(double Q);

/// d Re(lambda) / d tau at tau0 from the implicit-function derivative of F_p.
double crossing_speed(double Q, double tau0);

enum class Regime { StableAllDelays, StableBelowThreshold, OscillatoryAboveThreshold, Marginal };

std::string to_string(Regime r);

struct HopfAnalysis {
    double Q = 0.0;
    double omega = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double tau0 = 0.0;
    double a0 = 0.0;
    double b0 = 0.0;
    double crossing_speed = 0.0;
    Regime regime = Regime::OscillatoryAboveThreshold;

    /// Requires Q > 1 + kMarginalTol.
    static HopfAnalysis of(double Q);
};

struct StabilityVerdict {
    Regime regime = Regime::Marginal;
    double Q = 0.0;
    std::optional<double> tau0;
};

inline constexpr double kMarginalTol = 1e-9;

StabilityVerdict classify(double alpha, double m, double tau);

struct TrackOptions {
    int max_newton = 50;
    double newton_tol = 1e-12;
    double min_substep = 1e-6;
};

/// Follows the principal characteristic root along an increasing tau grid.
///
/// At tau = 0 the entry is the real zero-delay root rho = -Q (F_p) or +Q (F_n),
/// which lies on the wrong half-plane and is reported with on_branch = false.
/// For tau > 0 the entry is the complex root that passes through the Hopf pair
/// (a0, b0) at tau0 when Q > 1; it is seeded from its large-delay asymptote
/// rho ~ 1 + (ln Q + i pi) / (2 tau) and continued with Newton on
/// char_residual, halving the step on divergence.
std::vector<CharRoot> track_rightmost_root(double Q, std::span<const double> tau_grid,
                                           Branch branch = Branch::Positive,
                                           const TrackOptions& opts = {});

}  // namespace delayflux
