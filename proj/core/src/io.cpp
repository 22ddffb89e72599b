#include "delayflux/io.hpp"

#include <cstdio>

#include <json.hpp>

#include "delayflux/model.hpp"

namespace delayflux {

using nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,q0\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        os << format_double(traj.times[i]) << ',' << format_double(traj.q0[i]) << '\n';
    }
}

void write_snapshots_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,x,q\n";
    for (const auto& snap : traj.snapshots) {
        for (std::size_t i = 0; i < snap.field.size(); ++i) {
            os << format_double(snap.t) << ',' << format_double(traj.dx * static_cast<double>(i)) << ','
               << format_double(snap.field[i]) << '\n';
        }
    }
}

void write_iteration_csv(std::ostream& os, const IterationResult& result) {
    os << "k,sup_gap,min_ordering_slack\n";
    for (const auto& s : result.states) {
        os << s.k << ',' << format_double(s.sup_gap) << ',' << format_double(s.min_ordering_slack) << '\n';
    }
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRecord> records) {
    os << "alpha,m,tau,Q,tau0,analytic_verdict,sim_verdict,amp_ratio,period_est,mismatch\n";
    for (const auto& r : records) {
        os << format_double(r.alpha) << ',' << format_double(r.m) << ',' << format_double(r.tau) << ','
           << format_double(r.Q) << ',' << (r.tau0 ? format_double(*r.tau0) : "") << ',' << to_string(r.analytic)
           << ',';
        if (!r.error.empty()) {
            os << "Failed,,";
        } else if (r.simulated) {
            os << to_string(*r.simulated) << ',' << format_double(r.amp_ratio) << ',';
        } else {
            os << ",,";
        }
        if (r.simulated && r.error.empty()) os << format_double(r.period_est);
        os << ',' << (r.mismatch ? 1 : 0) << '\n';
    }
}

std::string steady_json(double alpha, double m) {
    const auto ss = SteadyState::of(alpha, m);
    ordered_json j;
    j["c"] = ss.c;
    j["Q"] = ss.Q;
    j["flux_at_c"] = boundary_flux(ss.c, alpha, m);
    return j.dump(2);
}

std::string hopf_json(double alpha, double m) {
    const auto ss = SteadyState::of(alpha, m);
    ordered_json j;
    if (ss.Q > 1.0 + kMarginalTol) {
        const auto h = HopfAnalysis::of(ss.Q);
        j["Q"] = h.Q;
        j["omega"] = h.omega;
        j["bracket_lo"] = h.bracket_lo;
        j["bracket_hi"] = h.bracket_hi;
        j["tau0"] = h.tau0;
        j["a0"] = h.a0;
        j["b0"] = h.b0;
        j["crossing_speed"] = h.crossing_speed;
        j["regime"] = to_string(h.regime);
    } else {
        j["Q"] = ss.Q;
        j["regime"] = to_string(ss.Q < 1.0 - kMarginalTol ? Regime::StableAllDelays : Regime::Marginal);
    }
    return j.dump(2);
}

std::string report_json(const OscillationReport& report) {
    ordered_json j;
    j["verdict"] = to_string(report.verdict);
    j["amp_ratio"] = report.amp_ratio;
    j["period_est"] = report.period_est;
    j["terminal_offset"] = report.terminal_offset;
    j["peak_count"] = report.peaks.size();
    auto peaks = ordered_json::array();
    for (const auto& p : report.peaks) peaks.push_back({{"t", p.t}, {"value", p.value}, {"amplitude", p.amplitude}});
    j["peaks"] = std::move(peaks);
    return j.dump(2);
}

}  // namespace delayflux
