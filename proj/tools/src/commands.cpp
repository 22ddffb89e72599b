#include "delayflux_cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "delayflux/diagnostics.hpp"
#include "delayflux/errors.hpp"
#include "delayflux/io.hpp"

namespace delayflux::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::ofstream open_output(const Context& ctx, const std::string& name) {
    fs::create_directories(ctx.out_dir);
    const auto path = fs::path(ctx.out_dir) / name;
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    return os;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Timestamps and conventions live here so the data files stay byte-identical.
void write_metadata(const Context& ctx, const std::string& command, const RunConfig* cfg, const KernelConfig& kernel) {
    ordered_json j;
    j["command"] = command;
    j["created_utc"] = utc_timestamp();
    j["version"] = "0.1.0";
    j["conventions"] = {
        {"representation", kernel.sign == BoundarySign::Influx ? "q = H - int G g ds" : "q = H + int G g ds"},
        {"kernel_decay", kernel.decay == DecayConvention::Shifted ? "exp(-(t-s))" : "exp(-t)"},
        {"fd_boundary", "mirrored ghost node, exponentially fitted differences"},
        {"scales", "q = P/P0, x in sqrt(D/k), t in 1/k"},
    };
    if (cfg) j["config"] = cfg->serialize();
    open_output(ctx, "metadata.json") << j.dump(2) << '\n';
}

void emit(const Context& ctx, const std::string& name, const std::string& body) {
    ctx.out << body << '\n';
    if (!ctx.out_dir.empty()) open_output(ctx, name) << body << '\n';
}

}  // namespace

std::string resolve_out_dir(const std::optional<std::string>& flag, const RunConfig* cfg) {
    if (flag && !flag->empty()) return *flag;
    if (cfg && !cfg->out_dir.empty()) return cfg->out_dir;
    if (const char* env = std::getenv("DELAYFLUX_OUT"); env && *env) return env;
    return ".";
}

int cmd_steady(double alpha, double m, const Context& ctx) {
    ModelParams{alpha, m, 0.0}.validate();
    emit(ctx, "steady.json", steady_json(alpha, m));
    return kOk;
}

int cmd_hopf(double alpha, double m, const Context& ctx) {
    ModelParams{alpha, m, 0.0}.validate();
    emit(ctx, "hopf.json", hopf_json(alpha, m));
    return kOk;
}

int cmd_simulate(const RunConfig& cfg, const Context& ctx) {
    const auto data = cfg.initial_data();
    SimulationOptions opts;
    opts.snapshot_every = cfg.snapshot_every;
    const auto traj = simulate(cfg.model, data, cfg.grid, opts);
    const auto report = analyze(traj, SteadyState::of(cfg.model).c);

    {
        auto os = open_output(ctx, "trajectory.csv");
        write_trajectory_csv(os, traj);
    }
    if (!traj.snapshots.empty()) {
        auto os = open_output(ctx, "snapshots.csv");
        write_snapshots_csv(os, traj);
    }
    open_output(ctx, "report.json") << report_json(report) << '\n';
    write_metadata(ctx, "simulate", &cfg, {});
    ctx.out << "verdict " << to_string(report.verdict) << " amp_ratio " << format_double(report.amp_ratio)
            << " period_est " << format_double(report.period_est) << '\n';
    return kOk;
}

int cmd_iterate(const RunConfig& cfg, const Context& ctx) {
    if (cfg.model.tau != 0.0) {
        throw DomainError("iterate: the integral iteration covers tau = 0; use simulate for delayed runs");
    }
    IterationOptions opts;
    opts.tol = cfg.iterate.tol;
    opts.k_max = cfg.iterate.k_max;
    opts.kernel = {cfg.iterate.decay, cfg.iterate.sign};
    const auto result = monotone_iterate(cfg.model, cfg.initial_data(), cfg.lattice, opts);

    {
        auto os = open_output(ctx, "iteration.csv");
        write_iteration_csv(os, result);
    }
    {
        auto os = open_output(ctx, "iteration_membrane.csv");
        os << "t,lower,upper\n";
        const auto& s = result.last();
        for (std::size_t n = 0; n <= s.lower.nt(); ++n) {
            os << format_double(cfg.lattice.dt * static_cast<double>(n)) << ',' << format_double(s.lower(0, n)) << ','
               << format_double(s.upper(0, n)) << '\n';
        }
    }
    write_metadata(ctx, "iterate", &cfg, opts.kernel);
    const auto& last = result.last();
    ctx.out << "iterations " << last.k << " sup_gap " << format_double(last.sup_gap) << '\n';
    if (!last.converged) {
        ctx.err << "iterate: sup_gap above tol after " << last.k << " iterations\n";
        return kNumericalFailure;
    }
    return kOk;
}

int cmd_sweep(const RunConfig& cfg, const Context& ctx) {
    if (cfg.sweep.alpha.empty() || cfg.sweep.m.empty() || cfg.sweep.tau.empty()) {
        throw ConfigError("sweep: [sweep] needs alpha, m and tau lists");
    }
    SweepOptions opts;
    opts.confirm = cfg.sweep.confirm;
    opts.jobs = cfg.sweep.jobs;
    const auto records = stability_sweep(cfg.sweep.alpha, cfg.sweep.m, cfg.sweep.tau, opts);
    {
        auto os = open_output(ctx, "sweep.csv");
        write_sweep_csv(os, records);
    }
    write_metadata(ctx, "sweep", &cfg, {});
    std::size_t failed = 0;
    std::size_t mismatched = 0;
    for (const auto& r : records) {
        failed += r.error.empty() ? 0 : 1;
        mismatched += r.mismatch ? 1 : 0;
    }
    ctx.out << "points " << records.size() << " failed " << failed << " mismatch " << mismatched << '\n';
    return failed ? kNumericalFailure : kOk;
}

int cmd_validate(const Context& ctx) {
    bool all = true;
    const auto line = [&](const std::string& name, bool ok, double metric) {
        ctx.out << (ok ? "PASS " : "FAIL ") << name << " " << format_double(metric) << '\n';
        all = all && ok;
    };

    // Kernel normalization: the homogeneous solve of f = 1 is e^{-t}.
    double norm_err = 0.0;
    for (double x : {0.0, 0.5, 2.0, 5.0}) {
        for (double t : {0.1, 1.0, 4.0}) {
            norm_err = std::max(norm_err, std::abs(homogeneous_term([](double) { return 1.0; }, x, t) - std::exp(-t)));
        }
    }
    line("kernel-normalization", norm_err < 1e-10, norm_err);

    // One delay window: the flux is history data for both solvers.
    {
        const ModelParams p{0.4, 4.0, 5.0};
        const auto data = InitialData::perturbed_steady(p, 0.5);
        const auto ladder = ladder_solve(p, data, 1);
        const auto grid = Grid::defaults(p.tau, p.tau);
        const auto fd = simulate(p, data, grid);
        double diff = 0.0;
        for (std::size_t n = 0; n < ladder.times.size(); ++n) {
            const auto j = static_cast<std::size_t>(std::llround(ladder.times[n] / grid.dt));
            diff = std::max(diff, std::abs(fd.q0.at(j) - ladder.q0[n]));
        }
        line("fd-vs-greens-rung1", diff < 1e-2, diff);
    }

    // One constant bounds the boundary convolution by 2 c1 t e^{-t}.
    {
        std::vector<double> t_fit;
        std::vector<double> t_check;
        for (int i = 0; i <= 20; ++i) t_fit.push_back(0.1 * std::pow(100.0, i / 20.0));
        for (int i = 0; i <= 99; ++i) t_check.push_back(0.1 + 9.9 * i / 99.0);
        const std::vector<double> xs = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
        const auto fit = fit_boundary_envelope(t_fit, t_check, xs, {DecayConvention::Literal, BoundarySign::Influx});
        line("boundary-envelope", fit.holds(), fit.c1);
    }
    return all ? kOk : kNumericalFailure;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Delayed membrane-flux reaction-diffusion toolkit", "delayflux"};
    app.require_subcommand(1);

    double alpha = 0.0;
    double m = 0.0;
    std::optional<double> tau;
    std::optional<double> alpha_opt;
    std::optional<double> m_opt;
    std::string config_path;
    std::optional<std::string> out_flag;
    std::optional<unsigned> jobs;
    bool confirm = false;

    auto* steady = app.add_subcommand("steady", "Steady state c, gain Q and flux at c (JSON)");
    steady->add_option("--alpha", alpha, "Dimensionless flux strength")->required();
    steady->add_option("--m", m, "Hill exponent")->required();
    steady->add_option("--out", out_flag, "Also write steady.json here");

    auto* hopf = app.add_subcommand("hopf", "Hopf threshold analysis (JSON)");
    hopf->add_option("--alpha", alpha, "Dimensionless flux strength")->required();
    hopf->add_option("--m", m, "Hill exponent")->required();
    hopf->add_option("--out", out_flag, "Also write hopf.json here");

    const auto model_flags = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "INI run configuration");
        sub->add_option("--alpha", alpha_opt, "Override model.alpha");
        sub->add_option("--m", m_opt, "Override model.m");
        sub->add_option("--out", out_flag, "Output directory");
    };
    auto* sim = app.add_subcommand("simulate", "Finite-difference run with trajectory, snapshots and report");
    model_flags(sim);
    sim->add_option("--tau", tau, "Override model.tau");
    auto* iter = app.add_subcommand("iterate", "Upper/lower iteration of the integral representation (tau = 0)");
    model_flags(iter);
    iter->add_option("--tau", tau, "Must be 0 when given");
    auto* sweep = app.add_subcommand("sweep", "Stability map over the [sweep] grids");
    sweep->add_option("--config", config_path, "INI run configuration")->required();
    sweep->add_option("--out", out_flag, "Output directory");
    sweep->add_option("--jobs", jobs, "Worker threads");
    sweep->add_flag("--confirm", confirm, "Confirm each point with a short simulation");
    auto* validate = app.add_subcommand("validate", "Kernel identity and cross-solver checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (steady->parsed() || hopf->parsed()) {
            Context ctx{out, err, out_flag ? *out_flag : std::string{}};
            return steady->parsed() ? cmd_steady(alpha, m, ctx) : cmd_hopf(alpha, m, ctx);
        }
        if (validate->parsed()) {
            Context ctx{out, err, {}};
            return cmd_validate(ctx);
        }
        RunConfig cfg = config_path.empty() ? RunConfig::parse_string("") : RunConfig::parse_file(config_path);
        if (alpha_opt) cfg.model.alpha = *alpha_opt;
        if (m_opt) cfg.model.m = *m_opt;
        if (iter->parsed()) cfg.model.tau = tau.value_or(0.0);
        if (sim->parsed() && tau) {
            const bool default_dt = cfg.grid.dt == Grid::defaults(cfg.model.tau, cfg.grid.t_end).dt;
            cfg.model.tau = *tau;
            if (default_dt) cfg.grid.dt = Grid::defaults(*tau, cfg.grid.t_end).dt;
        }
        if (jobs) cfg.sweep.jobs = *jobs;
        if (confirm) cfg.sweep.confirm = true;
        cfg.model.validate();
        Context ctx{out, err, resolve_out_dir(out_flag, &cfg)};
        if (sim->parsed()) return cmd_simulate(cfg, ctx);
        if (iter->parsed()) return cmd_iterate(cfg, ctx);
        return cmd_sweep(cfg, ctx);
    } catch (const std::invalid_argument& e) {  // DomainError and ConfigError
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    }
}

}  // namespace delayflux::cli
