#pragma once

#include <functional>
#include <string>
#include <vector>

namespace delayflux {

/// Dimensional parameters of P_t = D P_xx - k P with the delayed Hill-type
/// influx -A / (1 + (P(0,t-T0)/P0)^m) at the membrane.
struct PhysicalParams {
    double D = 1.0;   // diffusivity
    double k = 1.0;   // clearance rate
    double A = 1.0;   // maximal flux
    double P0 = 1.0;  // switch threshold
    double m = 1.0;   // Hill exponent
    double T0 = 0.0;  // delay

    void validate() const;
};

/// Dimensionless (alpha, m, tau). Concentration is scaled by P0, length by
/// sqrt(D/k) and time by 1/k.
struct ModelParams {
    double alpha = 1.0;
    double m = 1.0;
    double tau = 0.0;

    void validate() const;
};

ModelParams nondimensionalize(const PhysicalParams& p);

/// Unique root of c + c^{m+1} = alpha on (0, alpha).
double steady_state_c(double alpha, double m);

/// Q = m alpha c^{m-1} / (1 + c^m)^2, the slope of the flux law at the
/// steady boundary value.
double feedback_gain(double alpha, double m, double c);

/// Membrane flux law g(q0) = -alpha / (1 + q0^m), in [-alpha, 0).
double boundary_flux(double q0, double alpha, double m);

/// dg/dq0 = alpha m q0^{m-1} / (1 + q0^m)^2. Nonnegative.
double boundary_flux_slope(double q0, double alpha, double m);

/// Large-m estimate of Q: m(alpha-1)/alpha above alpha = 1, and the c ~ alpha
/// form m alpha^m / (1 + alpha^m)^2 below.
double asymptotic_gain(double alpha, double m);

/// Shape parameters of the stationary lower solution c exp(-zeta x - beta x^gamma).
struct LowerSolutionShape {
    double zeta;
    double beta;
    double gamma;

    /// gamma = 2, beta = 1.01, zeta = sqrt(2 beta + 1).
    static LowerSolutionShape defaults();
    void validate() const;
};

double lower_solution(double x, double alpha, double m, const LowerSolutionShape& shape);

struct SteadyState {
    double c = 0.0;
    double Q = 0.0;

    static SteadyState of(double alpha, double m);
    static SteadyState of(const ModelParams& p) { return of(p.alpha, p.m); }

    double profile(double x) const;
};

/// Piecewise-linear function through strictly increasing abscissae.
/// Outside the sampled range the nearest endpoint value is held.
class SampledFunction {
public:
    SampledFunction() = default;
    SampledFunction(std::vector<double> xs, std::vector<double> ys);

    double operator()(double x) const;

    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& ys() const { return ys_; }
    bool empty() const { return xs_.empty(); }
    double front_x() const { return xs_.front(); }
    double back_x() const { return xs_.back(); }

    /// Reads a two-column CSV with a header row whose column names must equal
    /// `x_name` and `y_name`.
    static SampledFunction read_csv(const std::string& path, const std::string& x_name,
                                    const std::string& y_name);

private:
    std::vector<double> xs_;
    std::vector<double> ys_;
};

/// Initial profile f on [0, inf) and membrane history h on [-tau, 0].
class InitialData {
public:
    using Fn = std::function<double(double)>;

    static constexpr double kCompatibilityTol = 1e-12;

    /// `sup_f` is M = sup f, required because a callable cannot be bounded
    /// from samples alone.
    InitialData(Fn f, Fn h, double sup_f, double tau);
    InitialData(SampledFunction f, SampledFunction h, double tau);

    /// f = c e^{-x}, h = c.
    static InitialData steady(const ModelParams& p);
    /// f = (1 + amplitude) c e^{-x}, h = f(0).
    static InitialData perturbed_steady(const ModelParams& p, double amplitude);

    double f(double x) const { return f_(x); }
    double h(double t) const { return h_(t); }
    double sup_f() const { return sup_f_; }
    double tau() const { return tau_; }
    const Fn& f_fn() const { return f_; }
    const Fn& h_fn() const { return h_; }

    /// Checks f >= c exp(-zeta x - beta x^gamma) on a sample lattice of [0, x_max].
    bool satisfies_lower_bound(const ModelParams& p, const LowerSolutionShape& shape,
                               double x_max = 20.0, int samples = 2001) const;

private:
    void validate() const;

    Fn f_;
    Fn h_;
    double sup_f_ = 0.0;
    double tau_ = 0.0;
};

}  // namespace delayflux
