#include "delayflux/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "delayflux/errors.hpp"

namespace delayflux {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Decaying: return "Decaying";
        case Verdict::Sustained: return "Sustained";
        case Verdict::Converged: return "Converged";
        case Verdict::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

namespace {

// Vertex of the parabola through three equally spaced samples.
std::pair<double, double> refine_peak(double t, double h, double ym, double y0, double yp) {
    const double denom = ym - 2.0 * y0 + yp;
    if (denom >= 0.0) return {t, y0};
    const double shift = 0.5 * (ym - yp) / denom;
    return {t + shift * h, y0 - 0.25 * (ym - yp) * shift};
}

}  // namespace

OscillationReport analyze(std::span<const double> times, std::span<const double> q0, double c,
                          const AnalyzeOptions& opts) {
    if (times.size() != q0.size()) throw DomainError("analyze: times and q0 differ in length");
    if (!(opts.transient_frac >= 0.0 && opts.transient_frac < 1.0)) {
        throw DomainError("analyze: transient_frac must lie in [0, 1)");
    }
    OscillationReport rep;
    if (times.size() < 3) return rep;
    rep.terminal_offset = std::abs(q0.back() - c);

    const double t_cut = times.front() + opts.transient_frac * (times.back() - times.front());
    const auto begin = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t_cut) - times.begin());
    const std::size_t n = times.size();
    const double h = (times.back() - times.front()) / static_cast<double>(n - 1);
    const auto d = [&](std::size_t i) { return q0[i] - c; };

    // Candidate maxima, then each one's swing down to the lowest point before
    // the next candidate.
    std::vector<std::size_t> cand;
    for (std::size_t i = std::max<std::size_t>(begin, 1); i + 1 < n; ++i) {
        if (d(i) > d(i - 1) && d(i) >= d(i + 1)) cand.push_back(i);
    }
    for (std::size_t j = 0; j < cand.size(); ++j) {
        const std::size_t stop = j + 1 < cand.size() ? cand[j + 1] : n;
        double trough = d(cand[j]);
        bool closed = false;
        for (std::size_t i = cand[j] + 1; i < stop; ++i) {
            trough = std::min(trough, d(i));
            if (i + 1 < n && d(i) < d(i - 1) && d(i) <= d(i + 1)) closed = true;
        }
        if (!closed && j + 1 == cand.size()) continue;  // swing cut off by the horizon
        const double swing = d(cand[j]) - trough;
        if (swing < opts.noise_floor) continue;
        const std::size_t i = cand[j];
        const auto [tp, vp] = refine_peak(times[i], h, d(i - 1), d(i), d(i + 1));
        rep.peaks.push_back({tp, vp, swing});
    }

    const std::size_t np = rep.peaks.size();
    if (np >= 2) {
        const std::size_t first = np > opts.sustained_peaks ? np - opts.sustained_peaks : 0;
        const double a0 = rep.peaks[first].amplitude;
        const double a1 = rep.peaks.back().amplitude;
        rep.amp_ratio = std::pow(a1 / a0, 1.0 / static_cast<double>(np - 1 - first));
        rep.period_est = (rep.peaks.back().t - rep.peaks[first].t) / static_cast<double>(np - 1 - first);
        rep.amp_source = AmplitudeSource::Peaks;
    } else {
        const std::size_t mid = begin + (n - begin) / 2;
        double early = 0.0;
        double late = 0.0;
        for (std::size_t i = begin; i < n; ++i) {
            double& half = i < mid ? early : late;
            half = std::max(half, std::abs(d(i)));
        }
        if (std::max(early, late) >= opts.noise_floor && early > 0.0) {
            rep.amp_ratio = late / early;
            rep.amp_source = AmplitudeSource::Envelope;
        }
    }

    // Measured peak decay outranks a small terminal offset, which a decaying
    // oscillation can hit by passing through c at the horizon.
    const bool shrinking = rep.amp_source != AmplitudeSource::None && rep.amp_ratio < 1.0 - opts.eps_s;
    if (np >= opts.sustained_peaks && std::abs(rep.amp_ratio - 1.0) <= opts.eps_s) {
        rep.verdict = Verdict::Sustained;
    } else if (shrinking && np >= 3) {
        rep.verdict = Verdict::Decaying;
    } else if (rep.terminal_offset < opts.converge_tol) {
        rep.verdict = Verdict::Converged;
    } else if (shrinking) {
        rep.verdict = Verdict::Decaying;
    }
    return rep;
}

double period_check(const OscillationReport& report, double Q) {
    if (!(Q > 1.0)) throw DomainError("period_check: requires Q > 1");
    if (!(report.period_est > 0.0)) throw DomainError("period_check: report has no period estimate");
    const double expected = 2.0 * std::numbers::pi / std::sqrt(Q * Q * Q * Q - 1.0);
    return std::abs(report.period_est - expected) / expected;
}

bool verdict_agrees(Regime analytic, Verdict simulated) {
    switch (analytic) {
        case Regime::StableAllDelays:
        case Regime::StableBelowThreshold:
            return simulated == Verdict::Decaying || simulated == Verdict::Converged;
        case Regime::OscillatoryAboveThreshold:
            return simulated == Verdict::Sustained;
        case Regime::Marginal:
            return true;
    }
    return true;
}

namespace {

SweepRecord sweep_point(double alpha, double m, double tau, const SweepOptions& opts) {
    SweepRecord r;
    r.alpha = alpha;
    r.m = m;
    r.tau = tau;
    try {
        const auto v = classify(alpha, m, tau);
        r.Q = v.Q;
        r.tau0 = v.tau0;
        r.analytic = v.regime;
        if (!opts.confirm) return r;

        const ModelParams p{alpha, m, tau};
        const auto data = InitialData::perturbed_steady(p, opts.perturbation);
        Grid grid;
        grid.L = opts.L;
        grid.nx = opts.nx;
        grid.t_end = std::max(opts.horizon_windows * tau, opts.min_horizon);
        grid.dt = tau > 0.0 ? std::min(opts.max_dt, tau / 50.0) : opts.max_dt;
        SimulationOptions sim;
        sim.record_every = 1;
        const auto traj = simulate(p, data, grid, sim);
        const auto rep = analyze(traj, SteadyState::of(p).c, opts.analyze);
        r.simulated = rep.verdict;
        r.amp_ratio = rep.amp_ratio;
        r.period_est = rep.period_est;
        r.mismatch = !verdict_agrees(r.analytic, rep.verdict);
    } catch (const std::exception& e) {
        r.error = e.what();
        r.mismatch = opts.confirm;
    }
    return r;
}

}  // namespace

std::vector<SweepRecord> stability_sweep(std::span<const double> alpha_grid, std::span<const double> m_grid,
                                         std::span<const double> tau_grid, const SweepOptions& opts) {
    for (auto grid : {alpha_grid, m_grid, tau_grid}) {
        for (double v : grid) {
            if (!std::isfinite(v)) throw DomainError("stability_sweep: grid values must be finite");
        }
    }
    std::vector<SweepRecord> out(alpha_grid.size() * m_grid.size() * tau_grid.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t idx = next++; idx < out.size(); idx = next++) {
            const std::size_t it = idx % tau_grid.size();
            const std::size_t im = (idx / tau_grid.size()) % m_grid.size();
            const std::size_t ia = idx / (tau_grid.size() * m_grid.size());
            out[idx] = sweep_point(alpha_grid[ia], m_grid[im], tau_grid[it], opts);
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(out.size())));
    if (jobs <= 1) {
        worker();
        return out;
    }
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    pool.clear();
    return out;
}

}  // namespace delayflux
