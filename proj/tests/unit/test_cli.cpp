#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <vector>

#include "delayflux/io.hpp"
#include "delayflux_cli/commands.hpp"

using namespace delayflux::cli;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "delayflux");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("delayflux_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("steady and hopf commands") {
    auto r = invoke({"steady", "--alpha", "0.4", "--m", "4"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["c"].get<double>() == Approx(0.3909).epsilon(1e-4));
    CHECK(j["Q"].get<double>() == Approx(0.0912).epsilon(1e-3));

    r = invoke({"steady", "--alpha", "-1", "--m", "4"});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());

    r = invoke({"hopf", "--alpha", "1.5", "--m", "4"});
    REQUIRE(r.code == 0);
    j = nlohmann::json::parse(r.out);
    CHECK(j["tau0"].get<double>() == Approx(1.0951).epsilon(1e-4));
    CHECK(j["bracket_lo"].get<double>() == Approx(0.6724).epsilon(1e-4));

    j = nlohmann::json::parse(invoke({"hopf", "--alpha", "5", "--m", "6"}).out);
    CHECK(j["tau0"].get<double>() == Approx(0.1152).epsilon(1e-3));
    j = nlohmann::json::parse(invoke({"hopf", "--alpha", "0.4", "--m", "4"}).out);
    CHECK(j["regime"] == "StableAllDelays");

    CHECK(invoke({"steady", "--alpha", "1"}).code == 2);
    CHECK(invoke({"bogus"}).code == 2);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("run config round-trips") {
    const auto cfg = RunConfig::parse_string(
        "[model]\nalpha=1.6\nm=2\ntau=10\n[grid]\nt_end=400\nnx=300\n[sweep]\nalpha=0.4,1.6\nm=4\ntau=1,2.5\n"
        "confirm=true\njobs=2\n[iterate]\ndecay=literal\n[output]\ndir=results\n");
    CHECK(cfg.grid.dt == Approx(1e-3));
    CHECK(cfg.grid.nx == 300);
    CHECK(cfg.sweep.tau.size() == 2);
    CHECK(cfg.iterate.decay == delayflux::DecayConvention::Literal);
    const auto again = RunConfig::parse_string(cfg.serialize());
    CHECK(again == cfg);
    CHECK(again.serialize() == cfg.serialize());

    CHECK_THROWS_AS(RunConfig::parse_string("[model]\nalpha=abc\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse_string("[nope]\nx=1\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse_string("[initial]\nf_csv=missing.csv\nh_csv=missing.csv\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse_string("[grid]\nnx=1.5\n"), ConfigError);
}

TEST_CASE("output directory resolution") {
    RunConfig cfg;
    setenv("DELAYFLUX_OUT", "/tmp/env_out", 1);
    CHECK(resolve_out_dir(std::string("flag"), &cfg) == "flag");
    CHECK(resolve_out_dir(std::nullopt, &cfg) == "/tmp/env_out");
    cfg.out_dir = "cfg";
    CHECK(resolve_out_dir(std::nullopt, &cfg) == "cfg");
    unsetenv("DELAYFLUX_OUT");
    CHECK(resolve_out_dir(std::nullopt, nullptr) == ".");
}

TEST_CASE("simulate is deterministic and writes its artifacts") {
    const auto dir = scratch("simulate");
    {
        std::ofstream cfg(dir / "run.ini");
        cfg << "[model]\nalpha=5\nm=6\ntau=0.2\n[grid]\nt_end=20\nnx=150\nsnapshot_every=5\n";
    }
    auto r = invoke({"simulate", "--config", (dir / "run.ini").string(), "--out", (dir / "a").string()});
    REQUIRE(r.code == 0);
    r = invoke({"simulate", "--config", (dir / "run.ini").string(), "--out", (dir / "b").string()});
    REQUIRE(r.code == 0);
    for (const char* f : {"trajectory.csv", "snapshots.csv", "report.json"}) {
        INFO(f);
        REQUIRE(fs::exists(dir / "a" / f));
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    CHECK(fs::exists(dir / "a" / "metadata.json"));
    CHECK(nlohmann::json::parse(slurp(dir / "a" / "report.json"))["verdict"] == "Sustained");

    const auto steady = scratch("steady_sim");
    r = invoke({"simulate", "--alpha", "1.5", "--m", "4", "--tau", "1", "--out", steady.string()});
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(slurp(steady / "report.json")).contains("verdict"));
}

TEST_CASE("simulate reads sampled initial data") {
    const auto dir = scratch("sampled");
    {
        std::ofstream f(dir / "f.csv");
        f.precision(17);
        f << "x,f\n";
        for (int i = 0; i <= 150; ++i) f << 0.1 * i << ',' << 0.9022133393979 * std::exp(-0.1 * i) << '\n';
        std::ofstream h(dir / "h.csv");
        h << "t,h\n-1,0.9022133393979\n0,0.9022133393979\n";
        std::ofstream cfg(dir / "run.ini");
        cfg << "[model]\nalpha=1.5\nm=4\ntau=0.5\n[grid]\nt_end=5\nnx=150\n[initial]\nf_csv=f.csv\nh_csv=h.csv\n";
    }
    const auto r = invoke({"simulate", "--config", (dir / "run.ini").string(), "--out", (dir / "out").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("Converged") != std::string::npos);
}

TEST_CASE("iterate command") {
    const auto dir = scratch("iterate");
    auto r = invoke({"iterate", "--alpha", "1.5", "--m", "4", "--out", dir.string()});
    CHECK(r.code == 1);  // default lattice horizon T = 10 does not reach tol in 30 sweeps
    CHECK(fs::exists(dir / "iteration.csv"));
    {
        std::ofstream cfg(dir / "it.ini");
        cfg << "[model]\nalpha=1.5\nm=4\n[lattice]\nT=1.5\n";
    }
    r = invoke({"iterate", "--config", (dir / "it.ini").string(), "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(slurp(dir / "iteration.csv").rfind("k,sup_gap,min_ordering_slack\n", 0) == 0);
    CHECK(invoke({"iterate", "--alpha", "1.5", "--m", "4", "--tau", "1", "--out", dir.string()}).code == 2);
}

TEST_CASE("sweep command") {
    const auto dir = scratch("sweep");
    {
        std::ofstream cfg(dir / "sweep.ini");
        cfg << "[sweep]\nalpha=0.4,1.6,1.5,5\nm=2,4,6\ntau=0.2,1.5\n";
        std::ofstream one(dir / "one.ini");
        one << "[sweep]\nalpha=1.5\nm=4\ntau=1.5\n";
    }
    auto r = invoke({"sweep", "--config", (dir / "sweep.ini").string(), "--out", (dir / "a").string(), "--jobs", "3"});
    REQUIRE(r.code == 0);
    r = invoke({"sweep", "--config", (dir / "sweep.ini").string(), "--out", (dir / "b").string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "a" / "sweep.csv") == slurp(dir / "b" / "sweep.csv"));

    r = invoke({"sweep", "--config", (dir / "one.ini").string(), "--out", (dir / "c").string()});
    REQUIRE(r.code == 0);
    const auto hopf = nlohmann::json::parse(invoke({"hopf", "--alpha", "1.5", "--m", "4"}).out);
    const auto csv = slurp(dir / "c" / "sweep.csv");
    CHECK(csv.find(delayflux::format_double(hopf["tau0"].get<double>())) != std::string::npos);

    CHECK(invoke({"sweep", "--out", dir.string()}).code == 2);
}

TEST_CASE("validate command") {
    const auto r = invoke({"validate"});
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("PASS kernel-normalization") != std::string::npos);
}
