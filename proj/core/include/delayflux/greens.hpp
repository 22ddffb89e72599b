#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "delayflux/fd_solver.hpp"
#include "delayflux/model.hpp"

namespace delayflux {

/// Decay factor of the reflected heat kernel for a source at time s.
enum class DecayConvention {
    Shifted,  // e^{-(t-s)}: the Duhamel kernel of q_t = q_xx - q
    Literal,  // e^{-t} for every s
};

/// Sign with which the membrane convolution enters the representation.
enum class BoundarySign {
    Influx,   // q = H - int G g ds; negative g raises q
    Literal,  // q = H + int G g ds
};

struct KernelConfig {
    DecayConvention decay = DecayConvention::Shifted;
    BoundarySign sign = BoundarySign::Influx;

    double sign_factor() const { return sign == BoundarySign::Influx ? -1.0 : 1.0; }
};

std::string to_string(DecayConvention d);
std::string to_string(BoundarySign s);

/// G(x,t; xi,s) = decay / sqrt(4 pi (t-s)) [exp(-(x-xi)^2 / 4(t-s)) + exp(-(x+xi)^2 / 4(t-s))].
class Kernel {
public:
    explicit Kernel(KernelConfig cfg = {}) : cfg_(cfg) {}

    double operator()(double x, double t, double xi, double s) const;
    const KernelConfig& config() const { return cfg_; }

private:
    KernelConfig cfg_;
};

/// int_0^inf G(x,t; xi,0) f(xi) dxi by 32-point Gauss-Legendre panels of
/// width sqrt(t) over the window where the Gaussians exceed ~1e-21 of their peak.
double homogeneous_term(const std::function<double(double)>& f, double x, double t);

/// Raw membrane convolution int_0^t G(x,t; 0,s) g(s) ds, without the
/// representation sign. Uses u = sqrt(t - s), which turns the 1/sqrt(t-s)
/// singularity into a smooth integrand, and composite Gauss in u.
double boundary_term(const std::function<double(double)>& g, double x, double t,
                     const KernelConfig& cfg = {}, int panels = 16);

/// Product-integration weights for the membrane convolution when g is known
/// at lattice times s_j = j dt and linearly interpolated between them.
/// The singular factor is integrated exactly under the u = sqrt(t - s) map.
class BoundaryWeights {
public:
    BoundaryWeights(double x, double dt, std::size_t n_max, DecayConvention decay);

    /// Weight of g(s_{n-d}) in the convolution evaluated at t_n.
    double weight(std::size_t n, std::size_t d) const;

    /// sum_d weight(n, d) g[n - d].
    double apply(std::size_t n, std::span<const double> g) const;

    double dt() const { return dt_; }
    std::size_t n_max() const { return left_.size() - 1; }

private:
    double dt_;
    DecayConvention decay_;
    std::vector<double> left_;   // hat rising on [r_{d-1}, r_d]
    std::vector<double> right_;  // hat falling on [r_d, r_{d+1}]
};

/// Tensor lattice x_i = i dx (i = 0..nx), t_n = n dt (n = 0..nt).
struct Lattice {
    double L = 5.0;
    double dx = 0.25;
    double T = 10.0;
    double dt = 0.05;

    std::size_t nx() const;
    std::size_t nt() const;
    void validate() const;
};

class LatticeField {
public:
    LatticeField() = default;
    LatticeField(std::size_t nx, std::size_t nt, double fill = 0.0)
        : nx_(nx), nt_(nt), values_((nx + 1) * (nt + 1), fill) {}

    double& operator()(std::size_t i, std::size_t n) { return values_[i * (nt_ + 1) + n]; }
    double operator()(std::size_t i, std::size_t n) const { return values_[i * (nt_ + 1) + n]; }
    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * (nt_ + 1), nt_ + 1};
    }
    std::size_t nx() const { return nx_; }
    std::size_t nt() const { return nt_; }

private:
    std::size_t nx_ = 0;
    std::size_t nt_ = 0;
    std::vector<double> values_;
};

struct IterationState {
    int k = 0;
    LatticeField lower;
    LatticeField upper;
    double sup_gap = 0.0;
    /// Smallest entry of the ordering chain lower_{k-1} <= lower_k <= upper_k <= upper_{k-1}
    /// across the lattice; for k = 0 only lower_0 <= upper_0.
    double min_ordering_slack = 0.0;
    bool converged = false;
};

struct IterationOptions {
    double tol = 1e-3;
    int k_max = 30;
    double ordering_slack = 1e-8;
    KernelConfig kernel;
    /// Seeds as functions of (x, t). Empty means 0 for the lower seed and
    /// sup f + alpha for the upper seed.
    std::function<double(double, double)> lower_seed;
    std::function<double(double, double)> upper_seed;
    /// Check f against the stationary lower solution before iterating.
    bool check_lower_bound = true;
    LowerSolutionShape shape = LowerSolutionShape::defaults();
};

struct IterationResult {
    Lattice lattice;
    KernelConfig kernel;
    /// Lipschitz bound of the flux law over the seeded sector.
    double lipschitz = 0.0;
    /// Whether the upper/lower sequences were coupled (order-reversing map).
    bool coupled = true;
    std::vector<IterationState> states;

    const IterationState& last() const { return states.back(); }
    /// Midpoint of the last upper and lower iterates.
    LatticeField limit() const;
};

/// Upper/lower iteration of the integral representation for tau = 0.
///
/// With the Influx sign the Picard map T is order-reversing, so the sequences
/// are coupled: upper_{k+1} = T(lower_k), lower_{k+1} = T(upper_k). With the
/// Literal sign T is order-preserving and each sequence iterates on itself.
IterationResult monotone_iterate(const ModelParams& params, const InitialData& data, const Lattice& lattice,
                                 const IterationOptions& opts = {});

struct LadderOptions {
    double dt = 0.05;
    KernelConfig kernel;
    /// Replaces the flux law by a constant.
    std::optional<double> frozen_flux;
};

/// Membrane trajectory over `rungs` delay windows. On each window the flux is
/// data built from the previous window (or from h on the first), so every
/// lattice value is an explicit quadrature. tau = 0 is accepted and solved by
/// marching with a scalar implicit solve per lattice step; `rungs` then counts
/// lattice steps.
Trajectory ladder_solve(const ModelParams& params, const InitialData& data, int rungs,
                        const LadderOptions& opts = {});

struct EnvelopeFit {
    double c1 = 0.0;
    std::vector<double> t;
    std::vector<double> sup_integral;  // sup_x int_0^t G(x,t; 0,s) ds
    std::vector<double> envelope;      // 2 c1 t e^{-t}

    bool holds() const;
};

/// Fits c1 in sup_x int_0^t G(x,t; 0,s) ds <= 2 c1 t e^{-t} on `t_fit`, then
/// evaluates the envelope on `t_check`.
EnvelopeFit fit_boundary_envelope(std::span<const double> t_fit, std::span<const double> t_check,
                                  std::span<const double> xs, const KernelConfig& cfg);

}  // namespace delayflux
