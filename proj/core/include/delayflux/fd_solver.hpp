#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "delayflux/model.hpp"

namespace delayflux {

/// Truncated domain [0, L] with nodes x_i = i dx, i = 0..nx, dx = L / nx.
/// Node nx carries the homogeneous Dirichlet condition.
struct Grid {
    double L = 15.0;
    int nx = 600;
    double dt = 1e-3;
    double t_end = 10.0;

    double dx() const { return L / nx; }
    std::size_t steps() const;
    void validate() const;

    /// L = 15, nx = 600, dt = min(1e-3, tau / 100) for tau > 0.
    static Grid defaults(double tau, double t_end);
};

/// Membrane values q(0, s) over the trailing delay window, linearly interpolated.
class HistoryBuffer {
public:
    HistoryBuffer(double tau, double spacing);

    /// Samples h on [-tau, 0] with spacing no larger than the requested one.
    void seed(const InitialData::Fn& h);
    void push(double t, double q0);
    double at(double t) const;

    double tau() const { return tau_; }
    double latest_time() const { return samples_.back().t; }
    std::size_t size() const { return samples_.size(); }

private:
    struct Sample {
        double t;
        double q0;
    };
    double tau_;
    double spacing_;
    std::deque<Sample> samples_;
};

struct Snapshot {
    double t = 0.0;
    std::vector<double> field;  // nx + 1 values on x_i = i dx
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> q0;
    std::vector<Snapshot> snapshots;
    double dx = 0.0;

    void append(double t, double value) {
        times.push_back(t);
        q0.push_back(value);
    }
};

struct SimulationOptions {
    /// Replaces the Hill flux by a constant (the linear frozen-flux problem).
    std::optional<double> frozen_flux;
    /// tau = 0 only: extra re-solves with the flux re-evaluated at the new
    /// membrane value, after the lagged first solve.
    int picard_corrections = 2;
    /// Snapshot cadence in time units; 0 disables snapshots.
    double snapshot_every = 0.0;
    /// Keep every n-th step in the q0 series.
    std::size_t record_every = 1;
};

struct FdState {
    double t = 0.0;
    std::vector<double> q;  // nodes 0..nx-1; q(L) = 0 is implicit
};

/// One backward-Euler step of q_t = q_xx - q with q_x(0) = flux imposed
/// through a mirrored ghost node and q(L) = 0.
std::vector<double> implicit_step(std::span<const double> q, double flux, double dx, double dt);

/// Steps the delayed problem, pulling the flux from its own history buffer.
class FdSolver {
public:
    FdSolver(const ModelParams& params, const InitialData& data, const Grid& grid,
             SimulationOptions opts = {});

    const FdState& state() const { return state_; }
    const HistoryBuffer& history() const { return history_; }

    /// Advances by dt and appends (t + dt, q0) to the history.
    const FdState& step();

    Trajectory run();

private:
    double flux_for(double q0) const;

    ModelParams params_;
    Grid grid_;
    SimulationOptions opts_;
    FdState state_;
    HistoryBuffer history_;
};

Trajectory simulate(const ModelParams& params, const InitialData& data, const Grid& grid,
                    const SimulationOptions& opts = {});

struct ConvergenceLevel {
    double h = 0.0;                // dx or dt of the level
    double diff_to_next = 0.0;     // sup |u_h - u_{h/2}| on the shared sample times
    std::optional<double> order;   // log2(diff_h / diff_{h/2})
};

struct ConvergenceTable {
    std::vector<ConvergenceLevel> space;
    std::vector<ConvergenceLevel> time;
    double spatial_order() const;
    double temporal_order() const;
};

struct ConvergenceOptions {
    int levels = 3;
    /// Membrane samples compared between levels; t = 0 is excluded because the
    /// flux/data mismatch there is a boundary layer, not a smooth error.
    std::vector<double> sample_times = {0.5, 1.0, 1.5, 2.0};
};

/// Richardson ladder on q(0, .): halves dx at fixed dt, then dt at fixed dx.
ConvergenceTable convergence_study(const ModelParams& params, const InitialData& data, const Grid& base,
                                   const SimulationOptions& sim = {}, const ConvergenceOptions& opts = {});

}  // namespace delayflux
