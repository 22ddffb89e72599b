#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "delayflux/fd_solver.hpp"
#include "delayflux/spectral.hpp"

namespace delayflux {

enum class Verdict { Decaying, Sustained, Converged, Indeterminate };

std::string to_string(Verdict v);

struct Peak {
    double t = 0.0;
    double value = 0.0;      // q(0,t) - c at the refined maximum
    double amplitude = 0.0;  // swing down to the following trough
};

/// Where amp_ratio came from.
enum class AmplitudeSource {
    Peaks,     // geometric mean of successive peak-swing ratios
    Envelope,  // fewer than two peaks: late-half over early-half sup |q - c|
    None,      // the analysis window is flat below the noise floor
};

struct OscillationReport {
    std::vector<Peak> peaks;
    double amp_ratio = 0.0;
    double period_est = 0.0;  // 0 when fewer than two peaks
    double terminal_offset = 0.0;
    AmplitudeSource amp_source = AmplitudeSource::None;
    Verdict verdict = Verdict::Indeterminate;
};

struct AnalyzeOptions {
    double transient_frac = 0.5;
    double eps_s = 0.05;
    double converge_tol = 1e-6;
    /// Swings smaller than this are not counted as peaks.
    double noise_floor = 1e-8;
    /// Peaks required for a Sustained verdict; amp_ratio uses the last this many.
    std::size_t sustained_peaks = 10;
};

/// Classifies q(0,t) around the steady value c. `times` must be uniformly spaced.
OscillationReport analyze(std::span<const double> times, std::span<const double> q0, double c,
                          const AnalyzeOptions& opts = {});

inline OscillationReport analyze(const Trajectory& traj, double c, const AnalyzeOptions& opts = {}) {
    return analyze(traj.times, traj.q0, c, opts);
}

/// |period_est - 2 pi / omega| / (2 pi / omega) with omega = sqrt(Q^4 - 1).
double period_check(const OscillationReport& report, double Q);

struct SweepOptions {
    bool confirm = false;
    unsigned jobs = 1;
    /// Simulation horizon: max(horizon_windows * tau, min_horizon).
    double horizon_windows = 80.0;
    double min_horizon = 60.0;
    /// Coarse grid for confirmation runs.
    double L = 15.0;
    int nx = 150;
    double max_dt = 5e-3;
    /// Initial data f = (1 + perturbation) c e^{-x}.
    double perturbation = 0.5;
    AnalyzeOptions analyze;
};

struct SweepRecord {
    double alpha = 0.0;
    double m = 0.0;
    double tau = 0.0;
    double Q = 0.0;
    std::optional<double> tau0;
    Regime analytic = Regime::Marginal;
    std::optional<Verdict> simulated;
    double amp_ratio = 0.0;
    double period_est = 0.0;
    bool mismatch = false;
    /// Non-empty when the point failed; the sweep continues.
    std::string error;
};

/// Whether a simulated verdict is consistent with an analytic regime.
bool verdict_agrees(Regime analytic, Verdict simulated);

/// Cartesian sweep in (alpha, m, tau) order, tau fastest. Output order is
/// fixed by the grids and does not depend on `jobs`.
std::vector<SweepRecord> stability_sweep(std::span<const double> alpha_grid, std::span<const double> m_grid,
                                         std::span<const double> tau_grid, const SweepOptions& opts = {});

}  // namespace delayflux
