// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance            run all criteria
//   acceptance --only 3,7 run a subset
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "delayflux/diagnostics.hpp"
#include "delayflux/greens.hpp"
#include "delayflux/spectral.hpp"

using namespace delayflux;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects sub-checks; the first failure is kept in the detail line.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && pass_) first_failure_ = what;
        pass_ = pass_ && ok;
        notes_.push_back(what);
    }
    void note(const std::string& s) { notes_.push_back(s); }
    Outcome done() const {
        std::string d = pass_ ? "" : "first failure: " + first_failure_ + "; ";
        for (std::size_t i = 0; i < notes_.size(); ++i) d += (i ? "; " : "") + notes_[i];
        return {pass_, d};
    }

private:
    bool pass_ = true;
    std::string first_failure_;
    std::vector<std::string> notes_;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

double membrane_at(const Trajectory& tr, double t) {
    const double dt = tr.times[1] - tr.times[0];
    const auto j = std::min(static_cast<std::size_t>(std::llround(t / dt)), tr.q0.size() - 1);
    return tr.q0[j];
}

const double kQ3 = 1.5941;
const double kQ4 = 4.5484;

Outcome steady_table() {
    Checks c;
    struct Row { double m, alpha, c, Q; };
    for (auto r : {Row{4, 0.4, 0.3909, 0.0912}, Row{2, 1.6, 0.8915, 0.8856}, Row{4, 1.5, 0.9022, 1.5941},
                   Row{6, 5, 1.2097, 4.5484}}) {
        const auto ss = SteadyState::of(r.alpha, r.m);
        c.expect(std::abs(ss.c - r.c) <= 5e-5 && std::abs(ss.Q - r.Q) <= 5e-5,
                 fmt("c=%.5f ", ss.c) + fmt("Q=%.5f", ss.Q));
    }
    return c.done();
}

Outcome hopf_thresholds() {
    Checks c;
    struct Row { double Q, tau0, lo, hi; };
    for (auto r : {Row{kQ3, 1.0951, 0.6723, 1.3448}, Row{kQ4, 0.1152, 0.07601, 0.15203}}) {
        const double t0 = hopf_tau0(r.Q);
        const auto b = hopf_bracket(r.Q);
        c.expect(std::abs(t0 - r.tau0) <= 1e-3, fmt("tau0(%.4f)=%.6f", r.Q, t0));
        c.expect(std::abs(b.lo - r.lo) <= 1e-4 && std::abs(b.hi - r.hi) <= 1e-4,
                 fmt("bracket (%.5f, %.5f)", b.lo, b.hi));
        c.expect(b.lo < t0 && t0 < b.hi, "tau0 inside bracket");
    }
    return c.done();
}

Outcome transversality() {
    Checks c;
    const double step = 1e-3;
    for (double Q : {1.1, kQ3, 3.0, kQ4, 10.0}) {
        const double t0 = hopf_tau0(Q);
        c.expect(crossing_speed(Q, t0) > 0.0, fmt("speed(%.4g)=%.4g", Q, crossing_speed(Q, t0)));
        std::vector<double> grid;
        for (int k = static_cast<int>(std::ceil(0.5 * t0 / step)); k * step <= 1.5 * t0 + step; ++k) grid.push_back(k * step);
        const auto roots = track_rightmost_root(Q, grid);
        int crossings = 0;
        bool in_cell = false;
        for (std::size_t i = 1; i < roots.size(); ++i) {
            if ((roots[i - 1].lambda_re < 0.0) != (roots[i].lambda_re < 0.0)) {
                ++crossings;
                in_cell = roots[i - 1].lambda_re < 0.0 && roots[i - 1].tau <= t0 + 1e-12 && t0 <= roots[i].tau + 1e-12;
            }
        }
        c.expect(crossings == 1 && in_cell, fmt("sign flip at tau0=%.6f (crossings %.0f)", t0, crossings));
    }
    return c.done();
}

Outcome subcritical() {
    Checks c;
    std::vector<double> grid;
    for (int k = 0; k <= 2000; ++k) grid.push_back(0.01 * k);
    for (double Q : {0.0912, 0.5, 0.8856, 0.99}) {
        double worst = -INFINITY;
        for (const auto& r : track_rightmost_root(Q, grid)) worst = std::max(worst, r.lambda_re);
        c.expect(worst < 0.0, fmt("Q=%.4f max lambda_re=%.3e", Q, worst));
    }
    return c.done();
}

Outcome simulation_regimes() {
    Checks c;
    struct Stable { double alpha, m; };
    for (auto ex : {Stable{0.4, 4}, Stable{1.6, 2}}) {
        for (double tau : {5.0, 10.0, 15.0}) {
            const ModelParams p{ex.alpha, ex.m, tau};
            const auto tr = simulate(p, InitialData::perturbed_steady(p, 0.5), Grid::defaults(tau, 40 * tau));
            const double cs = SteadyState::of(p).c;
            AnalyzeOptions whole;
            whole.transient_frac = 0.0;
            const auto rep = analyze(tr, cs, whole);
            const double off = std::abs(tr.q0.back() - cs);
            c.expect(off < 1e-2 && rep.amp_source != AmplitudeSource::None && rep.amp_ratio < 0.95,
                     fmt("alpha=%.1f ", ex.alpha) + fmt("tau=%g: ", tau) + fmt("|q-c|=%.1e amp_ratio=%.3f", off, rep.amp_ratio));
        }
    }
    struct Osc { double alpha, m, tau, T; };
    for (auto ex : {Osc{1.5, 4, 1.5, 200}, Osc{5, 6, 0.2, 60}}) {
        const ModelParams p{ex.alpha, ex.m, ex.tau};
        const auto rep =
            analyze(simulate(p, InitialData::perturbed_steady(p, 0.5), Grid::defaults(ex.tau, ex.T)), SteadyState::of(p).c);
        c.expect(rep.verdict == Verdict::Sustained && rep.amp_ratio >= 0.95 && rep.amp_ratio <= 1.05,
                 fmt("alpha=%.1f tau=%g: ", ex.alpha, ex.tau) + to_string(rep.verdict) +
                     fmt(" amp_ratio=%.4f peaks=%.0f", rep.amp_ratio, static_cast<double>(rep.peaks.size())));
    }
    return c.done();
}

Outcome near_threshold_period() {
    Checks c;
    const auto ss = SteadyState::of(1.5, 4);
    const double tau = 1.15 * hopf_tau0(ss.Q);
    const ModelParams p{1.5, 4, tau};
    const auto rep = analyze(simulate(p, InitialData::perturbed_steady(p, 0.5), Grid::defaults(tau, 300)), ss.c);
    std::vector<double> grid;
    for (int k = 1; k <= 400; ++k) grid.push_back(tau * k / 400);
    const double linear = 2 * std::numbers::pi / track_rightmost_root(ss.Q, grid).back().lambda_im;
    c.expect(rep.verdict == Verdict::Sustained, "verdict " + to_string(rep.verdict));
    const double err = rep.period_est > 0 ? period_check(rep, ss.Q) : INFINITY;
    c.expect(err < 0.10, fmt("period %.4f vs 2pi/omega %.4f", rep.period_est, 2 * std::numbers::pi / HopfAnalysis::of(ss.Q).omega) +
                             fmt(" (rel err %.3f)", err));
    c.note(fmt("linearized period at this tau %.4f", linear));
    return c.done();
}

Outcome cross_solver() {
    Checks c;
    const ModelParams p0{0.4, 4, 0};
    const auto d0 = InitialData::perturbed_steady(p0, 0.5);
    const Lattice lat{5, 0.25, 10, 0.05};
    const auto it = monotone_iterate(p0, d0, lat);
    c.expect(it.last().converged, fmt("iteration gap %.2e", it.last().sup_gap));
    const auto lim = it.limit();
    const auto fd = simulate(p0, d0, Grid::defaults(0, lat.T));
    const auto march = ladder_solve(p0, d0, static_cast<int>(lat.nt()));
    double fd_it = 0, it_lad = 0;
    for (std::size_t n = 0; n <= lat.nt(); ++n) {
        fd_it = std::max(fd_it, std::abs(membrane_at(fd, n * lat.dt) - lim(0, n)));
        it_lad = std::max(it_lad, std::abs(march.q0[n] - lim(0, n)));
    }
    c.expect(fd_it < 1e-2, fmt("fd vs iteration (tau=0) %.2e", fd_it));
    c.expect(it_lad < 1e-2, fmt("iteration vs ladder (tau=0) %.2e", it_lad));

    const ModelParams p5{0.4, 4, 5};
    const auto d5 = InitialData::perturbed_steady(p5, 0.5);
    const auto lad = ladder_solve(p5, d5, 3);
    const auto fd5 = simulate(p5, d5, Grid::defaults(5, 15));
    double fd_lad = 0;
    for (std::size_t n = 0; n < lad.times.size(); ++n) fd_lad = std::max(fd_lad, std::abs(membrane_at(fd5, lad.times[n]) - lad.q0[n]));
    c.expect(fd_lad < 1e-2, fmt("fd vs ladder (tau=5, 3 rungs) %.2e", fd_lad));
    return c.done();
}

Outcome monotone_invariants() {
    Checks c;
    const ModelParams p{1.5, 4, 0};
    const auto res = monotone_iterate(p, InitialData::perturbed_steady(p, 0.5), {5, 0.25, 1.5, 0.05});
    double worst_slack = INFINITY;
    bool nonincreasing = true;
    for (std::size_t k = 1; k < res.states.size(); ++k) {
        worst_slack = std::min(worst_slack, res.states[k].min_ordering_slack);
        nonincreasing = nonincreasing && res.states[k].sup_gap <= res.states[k - 1].sup_gap;
    }
    c.expect(worst_slack >= -1e-8, fmt("min ordering slack %.2e", worst_slack));
    c.expect(nonincreasing, "sup_gap nonincreasing");
    c.expect(res.last().converged && res.last().k <= 30,
             fmt("sup_gap %.2e after %.0f iterations", res.last().sup_gap, static_cast<double>(res.last().k)));
    c.note("horizon T=1.5");
    return c.done();
}

Outcome kernel_identities() {
    Checks c;
    const auto one = [](double) { return 1.0; };
    double norm = 0;
    for (double x : {0.0, 0.5, 1.0, 5.0}) {
        for (double t : {0.1, 1.0, 5.0}) norm = std::max(norm, std::abs(homogeneous_term(one, x, t) - std::exp(-t)));
    }
    c.expect(norm < 1e-10, fmt("normalization err %.1e over 12 pairs", norm));

    std::vector<double> fit, check;
    for (int i = 0; i <= 20; ++i) fit.push_back(0.1 * std::pow(100.0, i / 20.0));
    for (int i = 0; i <= 198; ++i) check.push_back(0.1 + 0.05 * i);
    const std::vector<double> xs = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
    const auto env = fit_boundary_envelope(fit, check, xs, {DecayConvention::Literal, BoundarySign::Influx});
    c.expect(env.holds(), fmt("envelope with C1=%.4f", env.c1));

    double hom = 0;
    for (int i = 0; i <= 20; ++i) {
        for (int n = 1; n <= 100; ++n) hom = std::max(hom, std::abs(homogeneous_term(one, 0.5 * i, 0.1 * n) - std::exp(-0.1 * n)));
    }
    c.expect(hom < 1e-8, fmt("f=1 homogeneous err %.1e", hom));
    return c.done();
}

Outcome discretization_order() {
    Checks c;
    const ModelParams p{0.4, 4, 0};
    Grid g;
    g.nx = 100;
    g.dt = 1e-2;
    SimulationOptions so;
    so.frozen_flux = -p.alpha;
    const auto tab = convergence_study(p, InitialData::perturbed_steady(p, 0.5), g, so);
    c.expect(tab.spatial_order() >= 1.8, fmt("spatial order %.3f", tab.spatial_order()));
    c.expect(tab.temporal_order() >= 0.9, fmt("temporal order %.3f", tab.temporal_order()));
    return c.done();
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "steady-state table", 1, steady_table},
        {2, "Hopf thresholds", 1, hopf_thresholds},
        {3, "transversality", 10, transversality},
        {4, "subcritical stability", 10, subcritical},
        {5, "simulation regimes", 60, simulation_regimes},
        {6, "near-threshold frequency", 30, near_threshold_period},
        {7, "cross-solver equivalence", 60, cross_solver},
        {8, "monotone-iteration invariants", 60, monotone_invariants},
        {9, "kernel identities", 60, kernel_identities},
        {10, "discretization order", 60, discretization_order},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string item;
            while (std::getline(ss, item, ',')) only.insert(std::atoi(item.c_str()));
        } else {
            std::fprintf(stderr, "usage: %s [--only 1,2,...]\n", argv[0]);
            return 2;
        }
    }

    int failed = 0;
    for (const auto& cr : all) {
        if (!only.empty() && !only.count(cr.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = cr.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > cr.budget_s) {
            out.pass = false;
            out.detail += fmt("; runtime %.1fs over budget %.0fs", secs, cr.budget_s);
        }
        std::printf("[%s] criterion %d %s (%.2fs): %s\n", out.pass ? "PASS" : "FAIL", cr.id, cr.name, secs,
                    out.detail.c_str());
        std::fflush(stdout);
        failed += out.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
