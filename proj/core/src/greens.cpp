#include "delayflux/greens.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "delayflux/errors.hpp"

namespace delayflux {

namespace {

using Gauss32 = boost::math::quadrature::gauss<double, 32>;

constexpr double kInvSqrtPi = 0.56418958354775628695;  // 1/sqrt(pi)
// Gaussian window half-width in units of sqrt(4t); erfc(7) ~ 4e-23.
constexpr double kWindow = 7.0;

template <class F>
double composite_gauss(F&& f, double a, double b, int panels) {
    if (!(b > a)) return 0.0;
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        sum += Gauss32::integrate(f, a + p * h, a + (p + 1) * h);
    }
    return sum;
}

int panel_count(double length, double width) {
    return std::max(1, static_cast<int>(std::ceil(length / width)));
}

}  // namespace

std::string to_string(DecayConvention d) { return d == DecayConvention::Shifted ? "shifted" : "literal"; }
std::string to_string(BoundarySign s) { return s == BoundarySign::Influx ? "influx" : "literal"; }

double Kernel::operator()(double x, double t, double xi, double s) const {
    if (!(t > s)) throw DomainError("kernel: requires t > s");
    const double lag = t - s;
    const double decay = cfg_.decay == DecayConvention::Shifted ? std::exp(-lag) : std::exp(-t);
    const double four_lag = 4.0 * lag;
    return decay / std::sqrt(std::numbers::pi * four_lag) *
           (std::exp(-(x - xi) * (x - xi) / four_lag) + std::exp(-(x + xi) * (x + xi) / four_lag));
}

double homogeneous_term(const std::function<double(double)>& f, double x, double t) {
    if (t < 0.0 || x < 0.0) throw DomainError("homogeneous_term: requires x, t >= 0");
    if (t == 0.0) return f(x);
    const double width = std::sqrt(4.0 * t);
    const double reach = kWindow * width;
    const double four_t = 4.0 * t;

    const auto direct = [&](double xi) { return std::exp(-(x - xi) * (x - xi) / four_t) * f(xi); };
    const auto mirror = [&](double xi) { return std::exp(-(x + xi) * (x + xi) / four_t) * f(xi); };

    const double a = std::max(0.0, x - reach);
    const double b = x + reach;
    double sum = composite_gauss(direct, a, b, panel_count(b - a, 0.5 * width));
    const double mirror_end = reach - x;
    if (mirror_end > 0.0) sum += composite_gauss(mirror, 0.0, mirror_end, panel_count(mirror_end, 0.5 * width));
    return std::exp(-t) / std::sqrt(std::numbers::pi * four_t) * sum;
}

double boundary_term(const std::function<double(double)>& g, double x, double t, const KernelConfig& cfg,
                     int panels) {
    if (t < 0.0 || x < 0.0) throw DomainError("boundary_term: requires x, t >= 0");
    if (panels < 1) throw DomainError("boundary_term: panels must be positive");
    if (t == 0.0) return 0.0;
    const double x2 = x * x;
    const double literal_decay = std::exp(-t);
    // s = t - u^2, ds = 2u du; G(x,t;0,s) 2u = 2/sqrt(pi) decay e^{-x^2/4u^2}.
    const auto integrand = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double u2 = u * u;
        const double decay = cfg.decay == DecayConvention::Shifted ? std::exp(-u2) : literal_decay;
        const double spatial = x2 > 0.0 ? std::exp(-x2 / (4.0 * u2)) : 1.0;
        return 2.0 * kInvSqrtPi * decay * spatial * g(t - u2);
    };
    return composite_gauss(integrand, 0.0, std::sqrt(t), panels);
}

BoundaryWeights::BoundaryWeights(double x, double dt, std::size_t n_max, DecayConvention decay)
    : dt_(dt), decay_(decay), left_(n_max + 1, 0.0), right_(n_max + 1, 0.0) {
    if (!(dt > 0.0)) throw DomainError("boundary weights: dt must be positive");
    if (x < 0.0) throw DomainError("boundary weights: x must be nonnegative");
    const double x2 = x * x;
    // Kernel in the lag r = t - s, times the Jacobian 2u of r = u^2. The
    // literal e^{-t} factor does not depend on r and is applied per row.
    const auto kernel_u = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double u2 = u * u;
        const double decay = decay_ == DecayConvention::Shifted ? std::exp(-u2) : 1.0;
        const double spatial = x2 > 0.0 ? std::exp(-x2 / (4.0 * u2)) : 1.0;
        return 2.0 * kInvSqrtPi * decay * spatial;
    };
    for (std::size_t d = 0; d <= n_max; ++d) {
        const double r = dt * static_cast<double>(d);
        if (d > 0) {
            const double r_lo = r - dt;
            left_[d] = Gauss32::integrate(
                [&](double u) { return kernel_u(u) * (u * u - r_lo) / dt; }, std::sqrt(r_lo), std::sqrt(r));
        }
        const double r_hi = r + dt;
        right_[d] = Gauss32::integrate(
            [&](double u) { return kernel_u(u) * (r_hi - u * u) / dt; }, std::sqrt(r), std::sqrt(r_hi));
    }
}

double BoundaryWeights::weight(std::size_t n, std::size_t d) const {
    if (n > n_max() || d > n) throw DomainError("boundary weights: index out of range");
    if (n == 0) return 0.0;
    double w = 0.0;
    if (d == 0) {
        w = right_[0];
    } else if (d == n) {
        w = left_[n];
    } else {
        w = left_[d] + right_[d];
    }
    if (decay_ == DecayConvention::Literal) w *= std::exp(-dt_ * static_cast<double>(n));
    return w;
}

double BoundaryWeights::apply(std::size_t n, std::span<const double> g) const {
    if (n == 0) return 0.0;
    if (g.size() <= n) throw DomainError("boundary weights: flux series too short");
    double sum = right_[0] * g[n] + left_[n] * g[0];
    for (std::size_t d = 1; d < n; ++d) sum += (left_[d] + right_[d]) * g[n - d];
    if (decay_ == DecayConvention::Literal) sum *= std::exp(-dt_ * static_cast<double>(n));
    return sum;
}

std::size_t Lattice::nx() const { return static_cast<std::size_t>(std::llround(L / dx)); }
std::size_t Lattice::nt() const { return static_cast<std::size_t>(std::llround(T / dt)); }

void Lattice::validate() const {
    if (!(L > 0.0 && dx > 0.0 && T > 0.0 && dt > 0.0)) throw DomainError("lattice: L, dx, T, dt must be positive");
    if (std::abs(static_cast<double>(nx()) * dx - L) > 1e-9 * L) throw DomainError("lattice: L must be a multiple of dx");
    if (std::abs(static_cast<double>(nt()) * dt - T) > 1e-9 * T) throw DomainError("lattice: T must be a multiple of dt");
}

LatticeField IterationResult::limit() const {
    const auto& s = last();
    LatticeField out(s.lower.nx(), s.lower.nt());
    for (std::size_t i = 0; i <= out.nx(); ++i) {
        for (std::size_t n = 0; n <= out.nt(); ++n) out(i, n) = 0.5 * (s.lower(i, n) + s.upper(i, n));
    }
    return out;
}

namespace {

struct Representation {
    LatticeField homogeneous;
    std::vector<BoundaryWeights> weights;  // one per x_i
};

Representation build_representation(const InitialData& data, const Lattice& lat, DecayConvention decay) {
    const std::size_t nx = lat.nx();
    const std::size_t nt = lat.nt();
    Representation rep{LatticeField(nx, nt), {}};
    rep.weights.reserve(nx + 1);
    for (std::size_t i = 0; i <= nx; ++i) {
        const double x = lat.dx * static_cast<double>(i);
        for (std::size_t n = 0; n <= nt; ++n) {
            rep.homogeneous(i, n) = homogeneous_term(data.f_fn(), x, lat.dt * static_cast<double>(n));
        }
        rep.weights.emplace_back(x, lat.dt, nt, decay);
    }
    return rep;
}

LatticeField seed_field(const std::function<double(double, double)>& seed, double fallback, const Lattice& lat) {
    LatticeField out(lat.nx(), lat.nt(), fallback);
    if (!seed) return out;
    for (std::size_t i = 0; i <= lat.nx(); ++i) {
        for (std::size_t n = 0; n <= lat.nt(); ++n) {
            out(i, n) = seed(lat.dx * static_cast<double>(i), lat.dt * static_cast<double>(n));
        }
    }
    return out;
}

// One application of the representation map to the membrane values of `source`.
LatticeField apply_map(const Representation& rep, const LatticeField& source, const ModelParams& p, double sign) {
    const std::size_t nx = source.nx();
    const std::size_t nt = source.nt();
    std::vector<double> flux(nt + 1);
    for (std::size_t n = 0; n <= nt; ++n) flux[n] = boundary_flux(source(0, n), p.alpha, p.m);
    LatticeField out(nx, nt);
    for (std::size_t i = 0; i <= nx; ++i) {
        for (std::size_t n = 0; n <= nt; ++n) {
            out(i, n) = rep.homogeneous(i, n) + sign * rep.weights[i].apply(n, flux);
        }
    }
    return out;
}

double flux_lipschitz(double lo, double hi, const ModelParams& p) {
    lo = std::max(lo, 0.0);
    double best = 0.0;
    const int samples = 4000;
    for (int j = 0; j <= samples; ++j) {
        const double q = lo + (hi - lo) * j / samples;
        best = std::max(best, boundary_flux_slope(q, p.alpha, p.m));
    }
    return best;
}

}  // namespace

IterationResult monotone_iterate(const ModelParams& params, const InitialData& data, const Lattice& lattice,
                                 const IterationOptions& opts) {
    params.validate();
    lattice.validate();
    if (params.tau != 0.0) throw DomainError("monotone_iterate: requires tau = 0 (use ladder_solve for tau > 0)");
    if (opts.k_max < 0) throw DomainError("monotone_iterate: k_max must be nonnegative");
    if (opts.check_lower_bound && !data.satisfies_lower_bound(params, opts.shape)) {
        throw DomainError("monotone_iterate: f lies below the stationary lower solution c exp(-zeta x - beta x^gamma)");
    }

    const double sign = opts.kernel.sign_factor();
    // Influx sign: T is order-reversing and the sequences must be coupled.
    const bool coupled = sign < 0.0;
    const Representation rep = build_representation(data, lattice, opts.kernel.decay);

    IterationResult result;
    result.lattice = lattice;
    result.kernel = opts.kernel;
    result.coupled = coupled;

    IterationState s0;
    s0.lower = seed_field(opts.lower_seed, 0.0, lattice);
    s0.upper = seed_field(opts.upper_seed, data.sup_f() + params.alpha, lattice);
    double gap = -INFINITY;
    double slack = INFINITY;
    double lo_min = INFINITY;
    double up_max = -INFINITY;
    for (std::size_t i = 0; i <= lattice.nx(); ++i) {
        for (std::size_t n = 0; n <= lattice.nt(); ++n) {
            gap = std::max(gap, s0.upper(i, n) - s0.lower(i, n));
            slack = std::min(slack, s0.upper(i, n) - s0.lower(i, n));
            if (i == 0) {
                lo_min = std::min(lo_min, s0.lower(0, n));
                up_max = std::max(up_max, s0.upper(0, n));
            }
        }
    }
    if (slack < -opts.ordering_slack) throw DomainError("monotone_iterate: seeds are not ordered");
    s0.sup_gap = gap;
    s0.min_ordering_slack = slack;
    s0.converged = gap <= opts.tol;
    result.lipschitz = flux_lipschitz(lo_min, up_max, params);
    result.states.push_back(std::move(s0));

    for (int k = 1; k <= opts.k_max && !result.states.back().converged; ++k) {
        const IterationState& prev = result.states.back();
        IterationState next;
        next.k = k;
        if (coupled) {
            next.upper = apply_map(rep, prev.lower, params, sign);
            next.lower = apply_map(rep, prev.upper, params, sign);
        } else {
            next.upper = apply_map(rep, prev.upper, params, sign);
            next.lower = apply_map(rep, prev.lower, params, sign);
        }
        double sup_gap = 0.0;
        double min_slack = INFINITY;
        for (std::size_t i = 0; i <= lattice.nx(); ++i) {
            for (std::size_t n = 0; n <= lattice.nt(); ++n) {
                const double lo_prev = prev.lower(i, n);
                const double up_prev = prev.upper(i, n);
                const double lo = next.lower(i, n);
                const double up = next.upper(i, n);
                if (!std::isfinite(lo) || !std::isfinite(up)) throw NumericalError("monotone_iterate: non-finite iterate");
                sup_gap = std::max(sup_gap, up - lo);
                min_slack = std::min({min_slack, lo - lo_prev, up - lo, up_prev - up});
            }
        }
        next.sup_gap = sup_gap;
        next.min_ordering_slack = min_slack;
        next.converged = sup_gap <= opts.tol;
        if (min_slack < -opts.ordering_slack) {
            std::ostringstream msg;
            msg.precision(6);
            msg << "monotone_iterate: ordering violated at k = " << k << " (slack " << min_slack << ")";
            throw NumericalError(msg.str());
        }
        result.states.push_back(std::move(next));
    }
    return result;
}

Trajectory ladder_solve(const ModelParams& params, const InitialData& data, int rungs, const LadderOptions& opts) {
    params.validate();
    if (rungs < 1) throw DomainError("ladder_solve: need at least one rung");
    if (!(opts.dt > 0.0)) throw DomainError("ladder_solve: dt must be positive");
    const double tau = params.tau;
    const double dt = opts.dt;
    if (tau > 0.0 && dt > tau * (1.0 + 1e-12)) {
        throw NumericalError("ladder_solve: lattice step exceeds the delay; rung data cannot be interpolated");
    }
    const std::size_t nt =
        tau > 0.0 ? static_cast<std::size_t>(std::llround(rungs * tau / dt)) : static_cast<std::size_t>(rungs);
    const double sign = opts.kernel.sign_factor();
    const BoundaryWeights weights(0.0, dt, nt, opts.kernel.decay);

    std::vector<double> q0(nt + 1);
    std::vector<double> flux(nt + 1);
    q0[0] = data.f(0.0);
    // q(0, s) for s on an earlier rung; only q0[0 .. known-1] are final.
    const auto membrane_at = [&](double s, std::size_t known) {
        if (s <= 0.0) return data.h(s);
        const double pos = s / dt;
        auto j = static_cast<std::size_t>(std::floor(pos));
        double w = pos - static_cast<double>(j);
        if (w > 1.0 - 1e-9) {
            ++j;
            w = 0.0;
        }
        if (w < 1e-9 ? j >= known : j + 1 >= known) {
            throw NumericalError("ladder_solve: rung restart outside the computed range");
        }
        return w < 1e-9 ? q0[j] : (1.0 - w) * q0[j] + w * q0[j + 1];
    };

    if (opts.frozen_flux) {
        std::fill(flux.begin(), flux.end(), *opts.frozen_flux);
        for (std::size_t n = 1; n <= nt; ++n) {
            q0[n] = homogeneous_term(data.f_fn(), 0.0, dt * static_cast<double>(n)) + sign * weights.apply(n, flux);
        }
    } else if (tau > 0.0) {
        flux[0] = boundary_flux(data.h(-tau), params.alpha, params.m);
        for (std::size_t n = 1; n <= nt; ++n) {
            const double t = dt * static_cast<double>(n);
            flux[n] = boundary_flux(membrane_at(t - tau, n), params.alpha, params.m);
            q0[n] = homogeneous_term(data.f_fn(), 0.0, t) + sign * weights.apply(n, flux);
        }
    } else {
        flux[0] = boundary_flux(q0[0], params.alpha, params.m);
        for (std::size_t n = 1; n <= nt; ++n) {
            const double t = dt * static_cast<double>(n);
            const double w0 = weights.weight(n, 0);
            flux[n] = 0.0;
            const double known = homogeneous_term(data.f_fn(), 0.0, t) + sign * weights.apply(n, flux);
            // q = known + sign w0 g(q); the right side is monotone in q, so bisect.
            const auto resid = [&](double q) { return q - known - sign * w0 * boundary_flux(q, params.alpha, params.m); };
            double lo = 0.0;
            double hi = std::max(1.0, known + params.alpha * w0 + 1.0);
            if (resid(lo) > 0.0 || resid(hi) < 0.0) throw NumericalError("ladder_solve: implicit step not bracketed");
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                (resid(mid) > 0.0 ? hi : lo) = mid;
            }
            q0[n] = 0.5 * (lo + hi);
            flux[n] = boundary_flux(q0[n], params.alpha, params.m);
        }
    }

    Trajectory traj;
    traj.times.resize(nt + 1);
    for (std::size_t n = 0; n <= nt; ++n) traj.times[n] = dt * static_cast<double>(n);
    traj.q0 = std::move(q0);
    return traj;
}

bool EnvelopeFit::holds() const {
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (sup_integral[j] > envelope[j] * (1.0 + 1e-12)) return false;
    }
    return true;
}

EnvelopeFit fit_boundary_envelope(std::span<const double> t_fit, std::span<const double> t_check,
                                  std::span<const double> xs, const KernelConfig& cfg) {
    if (t_fit.empty() || xs.empty()) throw DomainError("fit_boundary_envelope: empty grid");
    const auto one = [](double) { return 1.0; };
    const auto sup_over_x = [&](double t) {
        double best = 0.0;
        for (double x : xs) best = std::max(best, boundary_term(one, x, t, cfg, 64));
        return best;
    };
    EnvelopeFit fit;
    for (double t : t_fit) {
        if (!(t > 0.0)) throw DomainError("fit_boundary_envelope: times must be positive");
        fit.c1 = std::max(fit.c1, sup_over_x(t) / (2.0 * t * std::exp(-t)));
    }
    for (double t : t_check) {
        fit.t.push_back(t);
        fit.sup_integral.push_back(sup_over_x(t));
        fit.envelope.push_back(2.0 * fit.c1 * t * std::exp(-t));
    }
    return fit;
}

}  // namespace delayflux
