#pragma once

#include <ostream>
#include <span>
#include <string>

#include "delayflux/diagnostics.hpp"
#include "delayflux/fd_solver.hpp"
#include "delayflux/greens.hpp"
#include "delayflux/spectral.hpp"

namespace delayflux {

/// %.17g, which round-trips every double.
std::string format_double(double v);

/// Header `t,q0`.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// Header `t,x,q`, one row per node per snapshot.
void write_snapshots_csv(std::ostream& os, const Trajectory& traj);
/// Header `k,sup_gap,min_ordering_slack`.
void write_iteration_csv(std::ostream& os, const IterationResult& result);
/// Header `alpha,m,tau,Q,tau0,analytic_verdict,sim_verdict,amp_ratio,period_est,mismatch`.
/// Missing values are empty fields; failed points carry sim_verdict `Failed`.
void write_sweep_csv(std::ostream& os, std::span<const SweepRecord> records);

/// {c, Q, flux_at_c}.
std::string steady_json(double alpha, double m);
/// Full HopfAnalysis when Q > 1, otherwise {Q, regime}.
std::string hopf_json(double alpha, double m);
std::string report_json(const OscillationReport& report);

}  // namespace delayflux
