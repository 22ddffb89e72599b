#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "delayflux/errors.hpp"
#include "delayflux/model.hpp"

namespace delayflux {

SampledFunction::SampledFunction(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size()) throw DomainError("sampled function: column lengths differ");
    if (xs_.size() < 2) throw DomainError("sampled function: need at least two samples");
    for (std::size_t i = 0; i < xs_.size(); ++i) {
        if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i])) {
            throw DomainError("sampled function: non-finite sample");
        }
        if (i > 0 && !(xs_[i] > xs_[i - 1])) {
            throw DomainError("sampled function: abscissae must be strictly increasing");
        }
    }
}

double SampledFunction::operator()(double x) const {
    if (x <= xs_.front()) return ys_.front();
    if (x >= xs_.back()) return ys_.back();
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const auto i = static_cast<std::size_t>(it - xs_.begin());
    const double w = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
    return (1.0 - w) * ys_[i - 1] + w * ys_[i];
}

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::pair<std::string, std::string> split_pair(const std::string& line, const std::string& path) {
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
        throw DomainError(path + ": expected exactly two comma-separated columns");
    }
    return {trim(line.substr(0, comma)), trim(line.substr(comma + 1))};
}

double parse_number(const std::string& text, const std::string& path, std::size_t line_no) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw DomainError(path + ":" + std::to_string(line_no) + ": not a number: '" + text + "'");
    }
    return value;
}

}  // namespace

SampledFunction SampledFunction::read_csv(const std::string& path, const std::string& x_name,
                                          const std::string& y_name) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DomainError(path + ": empty file");
    // Tolerate a UTF-8 byte-order mark.
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_pair(trim(line), path);
    if (header.first != x_name || header.second != y_name) {
        throw DomainError(path + ": header must be '" + x_name + "," + y_name + "'");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        const auto cols = split_pair(line, path);
        xs.push_back(parse_number(cols.first, path, line_no));
        ys.push_back(parse_number(cols.second, path, line_no));
    }
    return SampledFunction(std::move(xs), std::move(ys));
}

InitialData::InitialData(Fn f, Fn h, double sup_f, double tau)
    : f_(std::move(f)), h_(std::move(h)), sup_f_(sup_f), tau_(tau) {
    if (!f_ || !h_) throw DomainError("initial data: f and h must be callable");
    validate();
}

InitialData::InitialData(SampledFunction f, SampledFunction h, double tau) : tau_(tau) {
    if (std::abs(f.front_x()) > 0.0) throw DomainError("initial profile samples must start at x = 0");
    const double lookback_tol = 1e-9 * std::max(1.0, tau);
    if (f.back_x() <= 0.0) throw DomainError("initial profile needs samples beyond x = 0");
    if (std::abs(h.back_x()) > lookback_tol) throw DomainError("history samples must end at t = 0");
    if (h.front_x() > -tau + lookback_tol) {
        if (tau > 0.0) throw DomainError("history samples must cover [-tau, 0]");
    }
    sup_f_ = *std::max_element(f.ys().begin(), f.ys().end());
    for (double y : f.ys()) {
        if (y < 0.0) throw DomainError("initial profile must be nonnegative");
    }
    for (double y : h.ys()) {
        if (y < 0.0) throw DomainError("history must be nonnegative");
    }
    f_ = [f = std::move(f)](double x) { return f(x); };
    h_ = [h = std::move(h)](double t) { return h(t); };
    validate();
}

void InitialData::validate() const {
    if (!(std::isfinite(tau_) && tau_ >= 0.0)) throw DomainError("tau must be nonnegative");
    if (!(std::isfinite(sup_f_) && sup_f_ >= 0.0)) throw DomainError("sup f must be finite and nonnegative");
    const double f0 = f_(0.0);
    const double h0 = h_(0.0);
    if (!(std::abs(h0 - f0) <= kCompatibilityTol)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "compatibility violated: h(0) = " << h0 << " but f(0) = " << f0;
        throw DomainError(msg.str());
    }
    // Spot checks; sampled data is checked exhaustively by the constructor.
    for (int i = 0; i <= 200; ++i) {
        const double x = 0.1 * i;
        const double fx = f_(x);
        if (!(fx >= 0.0) || fx > sup_f_ * (1.0 + 1e-12) + 1e-300) {
            throw DomainError("initial profile must lie in [0, sup f]");
        }
        if (tau_ > 0.0) {
            const double t = -tau_ * i / 200.0;
            if (!(h_(t) >= 0.0)) throw DomainError("history must be nonnegative");
        }
    }
}

InitialData InitialData::steady(const ModelParams& p) {
    p.validate();
    const double c = steady_state_c(p.alpha, p.m);
    return InitialData([c](double x) { return c * std::exp(-x); }, [c](double) { return c; }, c, p.tau);
}

InitialData InitialData::perturbed_steady(const ModelParams& p, double amplitude) {
    p.validate();
    if (!(amplitude > -1.0)) throw DomainError("perturbation amplitude must exceed -1");
    const double c0 = (1.0 + amplitude) * steady_state_c(p.alpha, p.m);
    return InitialData([c0](double x) { return c0 * std::exp(-x); }, [c0](double) { return c0; }, c0,
                       p.tau);
}

bool InitialData::satisfies_lower_bound(const ModelParams& p, const LowerSolutionShape& shape,
                                        double x_max, int samples) const {
    for (int i = 0; i < samples; ++i) {
        const double x = x_max * i / (samples - 1);
        if (f_(x) < lower_solution(x, p.alpha, p.m, shape) - 1e-14) return false;
    }
    return true;
}

}  // namespace delayflux
