#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "delayflux/fd_solver.hpp"
#include "delayflux/greens.hpp"
#include "delayflux/model.hpp"

namespace delayflux::cli {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Initial data: either (1 + perturbation) c e^{-x} with a matching constant
/// history, or two CSV files (`x,f` and `t,h`).
struct InitialSpec {
    double perturbation = 0.5;
    std::string f_csv;
    std::string h_csv;

    bool operator==(const InitialSpec&) const = default;
};

struct IterateSpec {
    double tol = 1e-3;
    int k_max = 30;
    DecayConvention decay = DecayConvention::Shifted;
    BoundarySign sign = BoundarySign::Influx;

    bool operator==(const IterateSpec&) const = default;
};

struct SweepSpec {
    std::vector<double> alpha;
    std::vector<double> m;
    std::vector<double> tau;
    bool confirm = false;
    unsigned jobs = 1;

    bool operator==(const SweepSpec&) const = default;
};

/// Flat INI file with one section per concern. Every key is optional; absent
/// keys keep the defaults below.
struct RunConfig {
    ModelParams model{1.5, 4.0, 1.5};
    Grid grid = Grid::defaults(1.5, 200.0);
    double snapshot_every = 0.0;
    InitialSpec initial;
    Lattice lattice;
    IterateSpec iterate;
    SweepSpec sweep;
    std::string out_dir;

    static RunConfig parse_file(const std::string& path);
    static RunConfig parse_string(const std::string& text, const std::string& base_dir = ".");
    std::string serialize() const;

    /// Resolves the initial data, reading CSVs relative to the config file.
    InitialData initial_data() const;

    bool operator==(const RunConfig& other) const;

private:
    std::string base_dir_ = ".";
};

}  // namespace delayflux::cli
