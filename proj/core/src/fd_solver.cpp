#include "delayflux/fd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "delayflux/errors.hpp"

namespace delayflux {

std::size_t Grid::steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

void Grid::validate() const {
    if (!(std::isfinite(L) && L > 0.0)) throw DomainError("grid: L must be positive");
    if (nx < 16) throw DomainError("grid: nx must be at least 16");
    if (!(std::isfinite(dt) && dt > 0.0)) throw DomainError("grid: dt must be positive");
    if (!(std::isfinite(t_end) && t_end >= 0.0)) throw DomainError("grid: t_end must be nonnegative");
}

Grid Grid::defaults(double tau, double t_end) {
    Grid g;
    g.t_end = t_end;
    g.dt = tau > 0.0 ? std::min(1e-3, tau / 100.0) : 1e-3;
    return g;
}

HistoryBuffer::HistoryBuffer(double tau, double spacing) : tau_(tau), spacing_(spacing) {
    if (!(tau >= 0.0)) throw DomainError("history: tau must be nonnegative");
    if (!(spacing > 0.0)) throw DomainError("history: spacing must be positive");
}

void HistoryBuffer::seed(const InitialData::Fn& h) {
    samples_.clear();
    const auto n = tau_ > 0.0 ? static_cast<std::size_t>(std::ceil(tau_ / spacing_ - 1e-9)) : 0;
    if (n == 0) {
        samples_.push_back({0.0, h(0.0)});
        return;
    }
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = i == n ? 0.0 : -tau_ + tau_ * static_cast<double>(i) / static_cast<double>(n);
        samples_.push_back({t, h(t)});
    }
}

void HistoryBuffer::push(double t, double q0) {
    if (!samples_.empty() && !(t > samples_.back().t)) {
        throw NumericalError("history: samples must be pushed in increasing time");
    }
    samples_.push_back({t, q0});
    // Keep one spare sample before t - tau so the window stays bracketed.
    const double horizon = t - tau_ - 2.0 * spacing_;
    while (samples_.size() > 2 && samples_[1].t < horizon) samples_.pop_front();
}

double HistoryBuffer::at(double t) const {
    const double slack = 1e-9 * std::max(1.0, std::abs(t));
    if (samples_.empty() || t > samples_.back().t + slack || t < samples_.front().t - slack) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "history underrun: requested q(0, " << t << ")";
        if (!samples_.empty()) {
            msg << ", buffer covers [" << samples_.front().t << ", " << samples_.back().t << "]";
        }
        throw NumericalError(msg.str());
    }
    if (t >= samples_.back().t) return samples_.back().q0;
    if (t <= samples_.front().t) return samples_.front().q0;
    const auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                     [](double v, const Sample& s) { return v < s.t; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (t - lo.t) / (hi.t - lo.t);
    return (1.0 - w) * lo.q0 + w * hi.q0;
}

std::vector<double> implicit_step(std::span<const double> q, double flux, double dx, double dt) {
    const std::size_t n = q.size();
    if (n < 2) throw DomainError("implicit_step: need at least two unknowns");
    // Exponentially fitted central differences: e^{-x} is reproduced exactly by
    // both the Laplacian and the mirrored ghost-node flux condition.
    const double lap_den = 2.0 * (std::cosh(dx) - 1.0);
    const double flux_den = 2.0 * std::sinh(dx);
    const double r = dt / lap_den;
    const double diag = 1.0 + dt + 2.0 * r;

    // Thomas algorithm; the system is strictly diagonally dominant.
    std::vector<double> upper(n);
    std::vector<double> rhs(q.begin(), q.end());
    rhs[0] -= r * flux_den * flux;
    upper[0] = -2.0 * r / diag;
    rhs[0] /= diag;
    for (std::size_t i = 1; i < n; ++i) {
        const double denom = diag + r * upper[i - 1];
        upper[i] = -r / denom;
        rhs[i] = (rhs[i] + r * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= upper[i] * rhs[i + 1];
    return rhs;
}

FdSolver::FdSolver(const ModelParams& params, const InitialData& data, const Grid& grid,
                   SimulationOptions opts)
    : params_(params), grid_(grid), opts_(std::move(opts)), history_(params.tau, grid.dt) {
    params_.validate();
    grid_.validate();
    if (std::abs(data.tau() - params_.tau) > 1e-12 * std::max(1.0, params_.tau)) {
        throw DomainError("initial data was built for a different tau");
    }
    if (params_.tau > 0.0 && grid_.dt > params_.tau) {
        throw DomainError("dt must not exceed tau: the delayed flux would need unknown values");
    }
    if (opts_.record_every == 0) throw DomainError("record_every must be positive");
    state_.t = 0.0;
    state_.q.resize(static_cast<std::size_t>(grid_.nx));
    const double dx = grid_.dx();
    for (std::size_t i = 0; i < state_.q.size(); ++i) state_.q[i] = data.f(dx * static_cast<double>(i));
    history_.seed(data.h_fn());
}

double FdSolver::flux_for(double q0) const {
    if (opts_.frozen_flux) return *opts_.frozen_flux;
    return boundary_flux(q0, params_.alpha, params_.m);
}

const FdState& FdSolver::step() {
    const double t_next = state_.t + grid_.dt;
    const double dx = grid_.dx();
    std::vector<double> next;
    if (params_.tau > 0.0 || opts_.frozen_flux) {
        const double delayed = params_.tau > 0.0 ? history_.at(t_next - params_.tau) : state_.q[0];
        next = implicit_step(state_.q, flux_for(delayed), dx, grid_.dt);
    } else {
        // Lagged Picard closure for the instantaneous flux.
        next = implicit_step(state_.q, flux_for(state_.q[0]), dx, grid_.dt);
        for (int k = 0; k < opts_.picard_corrections; ++k) {
            next = implicit_step(state_.q, flux_for(next[0]), dx, grid_.dt);
        }
    }
    for (double v : next) {
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "non-finite field after step to t = " << t_next;
            throw NumericalError(msg.str());
        }
    }
    state_.q = std::move(next);
    state_.t = t_next;
    history_.push(t_next, state_.q[0]);
    return state_;
}

Trajectory FdSolver::run() {
    Trajectory traj;
    traj.dx = grid_.dx();
    const std::size_t steps = grid_.steps();
    const std::size_t snap_stride =
        opts_.snapshot_every > 0.0
            ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts_.snapshot_every / grid_.dt)))
            : 0;
    const auto take_snapshot = [&]() {
        Snapshot s;
        s.t = state_.t;
        s.field.assign(state_.q.begin(), state_.q.end());
        s.field.push_back(0.0);
        traj.snapshots.push_back(std::move(s));
    };
    traj.times.reserve(steps / opts_.record_every + 2);
    traj.q0.reserve(steps / opts_.record_every + 2);
    traj.append(0.0, state_.q[0]);
    if (snap_stride) take_snapshot();
    const double t0 = state_.t;
    for (std::size_t n = 1; n <= steps; ++n) {
        step();
        // Re-anchor time to the step count so long runs do not drift.
        state_.t = t0 + grid_.dt * static_cast<double>(n);
        if (n % opts_.record_every == 0) traj.append(state_.t, state_.q[0]);
        if (snap_stride && n % snap_stride == 0) take_snapshot();
    }
    return traj;
}

Trajectory simulate(const ModelParams& params, const InitialData& data, const Grid& grid,
                    const SimulationOptions& opts) {
    FdSolver solver(params, data, grid, opts);
    return solver.run();
}

namespace {

std::vector<double> sample_membrane(const Trajectory& traj, const std::vector<double>& times, double dt) {
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        const auto idx = static_cast<std::size_t>(std::llround(t / dt));
        if (idx >= traj.q0.size() || std::abs(traj.times[idx] - t) > 1e-9 * std::max(1.0, t)) {
            throw DomainError("convergence_study: sample time is not on the time lattice");
        }
        out.push_back(traj.q0[idx]);
    }
    return out;
}

std::vector<ConvergenceLevel> ladder(const std::vector<std::vector<double>>& samples,
                                     const std::vector<double>& hs) {
    std::vector<ConvergenceLevel> out(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) {
        out[j].h = hs[j];
        if (j + 1 < samples.size()) {
            double diff = 0.0;
            for (std::size_t k = 0; k < samples[j].size(); ++k) {
                diff = std::max(diff, std::abs(samples[j][k] - samples[j + 1][k]));
            }
            out[j].diff_to_next = diff;
        }
    }
    for (std::size_t j = 0; j + 2 < samples.size(); ++j) {
        if (out[j + 1].diff_to_next > 0.0) {
            out[j].order = std::log2(out[j].diff_to_next / out[j + 1].diff_to_next);
        }
    }
    return out;
}

double last_order(const std::vector<ConvergenceLevel>& levels) {
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
        if (it->order) return *it->order;
    }
    return std::nan("");
}

}  // namespace

double ConvergenceTable::spatial_order() const { return last_order(space); }
double ConvergenceTable::temporal_order() const { return last_order(time); }

ConvergenceTable convergence_study(const ModelParams& params, const InitialData& data, const Grid& base,
                                   const SimulationOptions& sim, const ConvergenceOptions& opts) {
    if (opts.levels < 3) throw DomainError("convergence_study: need at least three levels");
    base.validate();
    const double horizon = *std::max_element(opts.sample_times.begin(), opts.sample_times.end());
    ConvergenceTable table;

    std::vector<std::vector<double>> samples;
    std::vector<double> hs;
    for (int j = 0; j < opts.levels; ++j) {
        Grid g = base;
        g.nx = base.nx << j;
        g.t_end = horizon;
        samples.push_back(sample_membrane(simulate(params, data, g, sim), opts.sample_times, g.dt));
        hs.push_back(g.dx());
    }
    table.space = ladder(samples, hs);

    samples.clear();
    hs.clear();
    for (int j = 0; j < opts.levels; ++j) {
        Grid g = base;
        g.dt = base.dt / static_cast<double>(1 << j);
        g.t_end = horizon;
        samples.push_back(sample_membrane(simulate(params, data, g, sim), opts.sample_times, g.dt));
        hs.push_back(g.dt);
    }
    table.time = ladder(samples, hs);
    return table;
}

}  // namespace delayflux
