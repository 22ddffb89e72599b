#include "delayflux/spectral.hpp"

#include <cmath>
#include <numbers>

#include "delayflux/errors.hpp"
#include "delayflux/model.hpp"

namespace delayflux {

namespace {

using cplx = std::complex<double>;

double branch_sign(Branch branch) { return branch == Branch::Positive ? 1.0 : -1.0; }

void require_supercritical(double Q, const char* where) {
    if (!(std::isfinite(Q) && Q > 1.0)) {
        throw DomainError(std::string(where) + ": requires Q > 1 (no delay threshold exists otherwise)");
    }
}

cplx char_value(cplx rho, double tau, double Q, Branch branch) {
    return rho + branch_sign(branch) * Q * std::exp(-(rho * rho - 1.0) * tau);
}

struct NewtonResult {
    cplx rho;
    bool converged = false;
};

// Newton on F(rho) = 0. The Positive-branch complex root lives in the upper
// half plane (the lower one holds its conjugate); a step that crosses the real
// axis has jumped branches and counts as divergence.
NewtonResult newton(cplx rho, double tau, double Q, Branch branch, const TrackOptions& opts) {
    const double side = branch_sign(branch);
    for (int it = 0; it < opts.max_newton; ++it) {
        const cplx f = char_value(rho, tau, Q, branch);
        if (std::abs(f) <= opts.newton_tol * std::max(1.0, std::abs(rho))) return {rho, true};
        const cplx step = f / char_derivative(rho, tau, Q, branch);
        rho -= step;
        if (!std::isfinite(rho.real()) || !std::isfinite(rho.imag()) || side * rho.imag() <= 0.0) {
            return {rho, false};
        }
    }
    const cplx f = char_value(rho, tau, Q, branch);
    return {rho, std::abs(f) <= opts.newton_tol * std::max(1.0, std::abs(rho))};
}

// Root of (rho^2 - 1) tau + Log(-rho / Q) = 0 in the upper half plane, which
// is the exponential equation F_p = 0 rewritten on the principal log branch.
// The log form stays well conditioned across decades of tau.
std::optional<cplx> solve_log_form(cplx rho, double tau, double Q) {
    for (int it = 0; it < 100; ++it) {
        const cplx g = (rho * rho - 1.0) * tau + std::log(-rho / Q);
        const cplx dg = 2.0 * rho * tau + 1.0 / rho;
        cplx step = g / dg;
        // Damp steps that would cross the branch cut (the real axis).
        while (rho.imag() - step.imag() <= 0.0) step *= 0.5;
        rho -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(rho))) return rho;
    }
    const cplx g = (rho * rho - 1.0) * tau + std::log(-rho / Q);
    if (std::abs(g) < 1e-10) return rho;
    return std::nullopt;
}

// Principal Positive-branch root at a given tau > 0, reached from its
// large-delay asymptote by continuation in log(tau).
std::optional<cplx> principal_root(double Q, double tau) {
    const double tau_start = std::max(tau, 50.0);
    cplx rho = 1.0 + cplx(std::log(Q), std::numbers::pi) / (2.0 * tau_start);
    auto solved = solve_log_form(rho, tau_start, Q);
    if (!solved) return std::nullopt;
    rho = *solved;
    double t = tau_start;
    while (t > tau) {
        t = std::max(tau, 0.9 * t);
        solved = solve_log_form(rho, t, Q);
        if (!solved) return std::nullopt;
        rho = *solved;
    }
    return rho;
}

}  // namespace

double Residual::norm() const { return std::hypot(re, im); }

Residual char_residual(double a, double b, double tau, double Q, Branch branch) {
    const double s = branch_sign(branch);
    const double e = std::exp(-(a * a - b * b - 1.0) * tau);
    const double phase = 2.0 * a * b * tau;
    return Residual{a + s * Q * e * std::cos(phase), b - s * Q * e * std::sin(phase)};
}

std::complex<double> char_derivative(std::complex<double> rho, double tau, double Q, Branch branch) {
    return 1.0 - branch_sign(branch) * 2.0 * Q * tau * rho * std::exp(-(rho * rho - 1.0) * tau);
}

CharRoot CharRoot::from_rho(double tau, std::complex<double> rho, Branch branch, bool converged) {
    CharRoot r;
    r.tau = tau;
    r.a = rho.real();
    r.b = rho.imag();
    r.lambda_re = r.a * r.a - r.b * r.b - 1.0;
    r.lambda_im = 2.0 * r.a * r.b;
    r.branch = branch;
    r.on_branch = branch == Branch::Positive ? r.a > 0.0 : r.a < 0.0;
    r.converged = converged;
    return r;
}

HopfBracket hopf_bracket(double Q) {
    require_supercritical(Q, "hopf_bracket");
    const double omega = std::sqrt(Q * Q * Q * Q - 1.0);
    const double lo = std::numbers::pi / (2.0 * omega);
    return HopfBracket{lo, 2.0 * lo};
}

double hopf_tau0(double Q) {
    const auto [lo0, hi0] = hopf_bracket(Q);
    const double omega = std::sqrt(Q * Q * Q * Q - 1.0);
    const double ratio = std::sqrt(Q * Q - 1.0) / std::sqrt(Q * Q + 1.0);
    // tan(tau omega) sweeps (-inf, 0) across the bracket, so the residual is increasing.
    double lo = lo0;
    double hi = hi0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (std::tan(mid * omega) + ratio < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double hopf_tau0_closed_form(double Q) {
    require_supercritical(Q, "hopf_tau0_closed_form");
    const double omega = std::sqrt(Q * Q * Q * Q - 1.0);
    return (std::numbers::pi - std::atan(std::sqrt(Q * Q - 1.0) / std::sqrt(Q * Q + 1.0))) / omega;
}

CrossingPair crossing_pair(double Q) {
    if (!(std::isfinite(Q) && Q >= 1.0)) throw DomainError("crossing_pair: requires Q >= 1");
    return CrossingPair{std::sqrt((Q * Q + 1.0) / 2.0), std::sqrt((Q * Q - 1.0) / 2.0)};
}

double crossing_speed(double Q, double tau0) {
    const auto [a0, b0] = crossing_pair(Q);
    const double phase = 2.0 * a0 * b0 * tau0;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    const double d1 = 1.0 - 2.0 * Q * tau0 * (a0 * c + b0 * s);
    const double d2 = 2.0 * Q * tau0 * (b0 * c - a0 * s);
    return 4.0 * Q * a0 * b0 / (d1 * d1 + d2 * d2) * (a0 * s - b0 * c);
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::StableAllDelays: return "StableAllDelays";
        case Regime::StableBelowThreshold: return "StableBelowThreshold";
        case Regime::OscillatoryAboveThreshold: return "OscillatoryAboveThreshold";
        case Regime::Marginal: return "Marginal";
    }
    return "Marginal";
}

HopfAnalysis HopfAnalysis::of(double Q) {
    if (!(Q > 1.0 + kMarginalTol)) throw DomainError("HopfAnalysis: requires Q > 1");
    HopfAnalysis h;
    h.Q = Q;
    h.omega = std::sqrt(Q * Q * Q * Q - 1.0);
    const auto bracket = hopf_bracket(Q);
    h.bracket_lo = bracket.lo;
    h.bracket_hi = bracket.hi;
    h.tau0 = hopf_tau0(Q);
    const auto pair = crossing_pair(Q);
    h.a0 = pair.a0;
    h.b0 = pair.b0;
    h.crossing_speed = delayflux::crossing_speed(Q, h.tau0);
    h.regime = Regime::OscillatoryAboveThreshold;
    return h;
}

StabilityVerdict classify(double alpha, double m, double tau) {
    ModelParams{alpha, m, tau}.validate();
    const auto ss = SteadyState::of(alpha, m);
    StabilityVerdict v;
    v.Q = ss.Q;
    if (ss.Q < 1.0 - kMarginalTol) {
        v.regime = Regime::StableAllDelays;
    } else if (ss.Q > 1.0 + kMarginalTol) {
        v.tau0 = hopf_tau0(ss.Q);
        if (tau < *v.tau0) {
            v.regime = Regime::StableBelowThreshold;
        } else if (tau > *v.tau0) {
            v.regime = Regime::OscillatoryAboveThreshold;
        } else {
            v.regime = Regime::Marginal;
        }
    } else {
        v.regime = Regime::Marginal;
    }
    return v;
}

std::vector<CharRoot> track_rightmost_root(double Q, std::span<const double> tau_grid, Branch branch,
                                           const TrackOptions& opts) {
    if (!(std::isfinite(Q) && Q > 0.0)) throw DomainError("track_rightmost_root: requires Q > 0");
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        if (!(tau_grid[i] >= 0.0) || (i > 0 && !(tau_grid[i] > tau_grid[i - 1]))) {
            throw DomainError("track_rightmost_root: tau grid must be nonnegative and increasing");
        }
    }
    const double mirror = branch_sign(branch);
    std::vector<CharRoot> out;
    out.reserve(tau_grid.size());

    std::optional<cplx> prev;
    double prev_tau = 0.0;
    for (const double tau : tau_grid) {
        if (tau == 0.0) {
            out.push_back(CharRoot::from_rho(0.0, cplx(-mirror * Q, 0.0), branch, true));
            continue;
        }
        NewtonResult result;
        if (prev) {
            // Advance from prev_tau to tau, halving the substep on failure.
            cplx rho = *prev;
            double t = prev_tau;
            double dt = tau - prev_tau;
            bool ok = true;
            while (t < tau) {
                const double target = std::min(tau, t + dt);
                const auto trial = newton(rho, target, Q, branch, opts);
                if (trial.converged) {
                    rho = trial.rho;
                    t = target;
                    dt *= 2.0;
                } else if (dt * 0.5 >= opts.min_substep) {
                    dt *= 0.5;
                } else {
                    ok = false;
                    break;
                }
            }
            result = {rho, ok};
        }
        if (!result.converged) {
            // Fresh seed from the asymptote; flagged if continuation had failed.
            const bool restarted = prev.has_value();
            const auto seed = principal_root(Q, tau);
            if (seed) {
                result = newton(mirror * *seed, tau, Q, branch, opts);
                if (restarted) result.converged = false;
            } else {
                result = {prev.value_or(cplx(mirror, mirror)), false};
            }
        }
        out.push_back(CharRoot::from_rho(tau, result.rho, branch, result.converged));
        prev = result.rho;
        prev_tau = tau;
    }
    return out;
}

}  // namespace delayflux
