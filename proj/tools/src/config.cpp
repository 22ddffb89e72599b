#include "delayflux_cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "delayflux/io.hpp"

namespace delayflux::cli {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

double to_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' is not a number: '" + text + "'");
    }
}

template <class T>
void read_num(const pt::ptree& tree, const std::string& key, T& out) {
    const auto v = tree.get_optional<std::string>(key);
    if (!v) return;
    const double d = to_double(key, *v);
    if constexpr (std::is_integral_v<T>) {
        if (d != std::floor(d)) throw ConfigError("config: '" + key + "' must be an integer");
        out = static_cast<T>(d);
    } else {
        out = d;
    }
}

std::vector<double> read_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError("config: empty entry in '" + key + "'");
        out.push_back(to_double(key, item.substr(b, e - b + 1)));
    }
    return out;
}

std::string write_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

bool read_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError("config: '" + key + "' must be true or false");
}

DecayConvention read_decay(const std::string& text) {
    if (text == "shifted") return DecayConvention::Shifted;
    if (text == "literal") return DecayConvention::Literal;
    throw ConfigError("config: iterate.decay must be shifted or literal");
}

BoundarySign read_sign(const std::string& text) {
    if (text == "influx") return BoundarySign::Influx;
    if (text == "literal") return BoundarySign::Literal;
    throw ConfigError("config: iterate.sign must be influx or literal");
}

}  // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), fs::path(path).parent_path().string());
}

RunConfig RunConfig::parse_string(const std::string& text, const std::string& base_dir) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    static const std::vector<std::string> known = {"model", "grid", "initial", "lattice", "iterate", "sweep", "output"};
    for (const auto& [section, body] : tree) {
        if (std::find(known.begin(), known.end(), section) == known.end()) {
            throw ConfigError("config: unknown section [" + section + "]");
        }
    }

    RunConfig c;
    c.base_dir_ = base_dir.empty() ? "." : base_dir;
    read_num(tree, "model.alpha", c.model.alpha);
    read_num(tree, "model.m", c.model.m);
    read_num(tree, "model.tau", c.model.tau);

    // Grid defaults follow tau unless overridden.
    double t_end = c.grid.t_end;
    read_num(tree, "grid.t_end", t_end);
    c.grid = Grid::defaults(c.model.tau, t_end);
    read_num(tree, "grid.L", c.grid.L);
    read_num(tree, "grid.nx", c.grid.nx);
    read_num(tree, "grid.dt", c.grid.dt);
    read_num(tree, "grid.snapshot_every", c.snapshot_every);

    read_num(tree, "initial.perturbation", c.initial.perturbation);
    c.initial.f_csv = tree.get("initial.f_csv", std::string{});
    c.initial.h_csv = tree.get("initial.h_csv", std::string{});
    if (c.initial.f_csv.empty() != c.initial.h_csv.empty()) {
        throw ConfigError("config: initial.f_csv and initial.h_csv must be given together");
    }

    read_num(tree, "lattice.L", c.lattice.L);
    read_num(tree, "lattice.dx", c.lattice.dx);
    read_num(tree, "lattice.T", c.lattice.T);
    read_num(tree, "lattice.dt", c.lattice.dt);

    read_num(tree, "iterate.tol", c.iterate.tol);
    read_num(tree, "iterate.k_max", c.iterate.k_max);
    if (auto v = tree.get_optional<std::string>("iterate.decay")) c.iterate.decay = read_decay(*v);
    if (auto v = tree.get_optional<std::string>("iterate.sign")) c.iterate.sign = read_sign(*v);

    if (auto v = tree.get_optional<std::string>("sweep.alpha")) c.sweep.alpha = read_list("sweep.alpha", *v);
    if (auto v = tree.get_optional<std::string>("sweep.m")) c.sweep.m = read_list("sweep.m", *v);
    if (auto v = tree.get_optional<std::string>("sweep.tau")) c.sweep.tau = read_list("sweep.tau", *v);
    if (auto v = tree.get_optional<std::string>("sweep.confirm")) c.sweep.confirm = read_bool("sweep.confirm", *v);
    read_num(tree, "sweep.jobs", c.sweep.jobs);

    c.out_dir = tree.get("output.dir", std::string{});

    for (const auto& f : {c.initial.f_csv, c.initial.h_csv}) {
        if (!f.empty() && !fs::exists(fs::path(c.base_dir_) / f)) {
            throw ConfigError("config: input file '" + f + "' does not exist");
        }
    }
    return c;
}

std::string RunConfig::serialize() const {
    pt::ptree tree;
    tree.put("model.alpha", format_double(model.alpha));
    tree.put("model.m", format_double(model.m));
    tree.put("model.tau", format_double(model.tau));
    tree.put("grid.L", format_double(grid.L));
    tree.put("grid.nx", grid.nx);
    tree.put("grid.dt", format_double(grid.dt));
    tree.put("grid.t_end", format_double(grid.t_end));
    tree.put("grid.snapshot_every", format_double(snapshot_every));
    tree.put("initial.perturbation", format_double(initial.perturbation));
    if (!initial.f_csv.empty()) {
        tree.put("initial.f_csv", initial.f_csv);
        tree.put("initial.h_csv", initial.h_csv);
    }
    tree.put("lattice.L", format_double(lattice.L));
    tree.put("lattice.dx", format_double(lattice.dx));
    tree.put("lattice.T", format_double(lattice.T));
    tree.put("lattice.dt", format_double(lattice.dt));
    tree.put("iterate.tol", format_double(iterate.tol));
    tree.put("iterate.k_max", iterate.k_max);
    tree.put("iterate.decay", to_string(iterate.decay));
    tree.put("iterate.sign", to_string(iterate.sign));
    if (!sweep.alpha.empty()) tree.put("sweep.alpha", write_list(sweep.alpha));
    if (!sweep.m.empty()) tree.put("sweep.m", write_list(sweep.m));
    if (!sweep.tau.empty()) tree.put("sweep.tau", write_list(sweep.tau));
    tree.put("sweep.confirm", sweep.confirm ? "true" : "false");
    tree.put("sweep.jobs", sweep.jobs);
    if (!out_dir.empty()) tree.put("output.dir", out_dir);
    std::ostringstream os;
    pt::write_ini(os, tree);
    return os.str();
}

InitialData RunConfig::initial_data() const {
    if (initial.f_csv.empty()) return InitialData::perturbed_steady(model, initial.perturbation);
    const fs::path base(base_dir_);
    auto f = SampledFunction::read_csv((base / initial.f_csv).string(), "x", "f");
    auto h = SampledFunction::read_csv((base / initial.h_csv).string(), "t", "h");
    return InitialData(std::move(f), std::move(h), model.tau);
}

bool RunConfig::operator==(const RunConfig& o) const {
    const auto grid_eq = grid.L == o.grid.L && grid.nx == o.grid.nx && grid.dt == o.grid.dt && grid.t_end == o.grid.t_end;
    const auto lat_eq = lattice.L == o.lattice.L && lattice.dx == o.lattice.dx && lattice.T == o.lattice.T &&
                        lattice.dt == o.lattice.dt;
    return model.alpha == o.model.alpha && model.m == o.model.m && model.tau == o.model.tau && grid_eq &&
           snapshot_every == o.snapshot_every && initial == o.initial && lat_eq && iterate == o.iterate &&
           sweep == o.sweep && out_dir == o.out_dir;
}

}  // namespace delayflux::cli
