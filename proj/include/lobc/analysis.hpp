#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lobc/core.hpp"
#include "lobc/eigen.hpp"
#include "lobc/hamiltonian.hpp"
#include "lobc/pucci.hpp"
#include "lobc/solver.hpp"

namespace lobc {

// ---------------------------------------------------------------- quadrature

inline double trapezoid(const std::vector<double>& r, const std::vector<double>& f) {
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < r.size(); ++j) s += 0.5 * (r[j + 1] - r[j]) * (f[j] + f[j + 1]);
    return s;
}

/// Linear interpolation of samples (r, f) at x; r increasing and x inside.
inline double interpolate(const std::vector<double>& r, const std::vector<double>& f, double x) {
    if (x <= r.front()) return f.front();
    if (x >= r.back()) return f.back();
    const auto it = std::upper_bound(r.begin(), r.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - r.begin()) - 1;
    const double t = (x - r[j]) / (r[j + 1] - r[j]);
    return (1.0 - t) * f[j] + t * f[j + 1];
}

/// Trapezoid integral of the piecewise-linear interpolant over [a, b].
inline double trapezoid_between(const std::vector<double>& r, const std::vector<double>& f, double a, double b) {
    std::vector<double> x{a}, y{interpolate(r, f, a)};
    for (std::size_t j = 0; j < r.size(); ++j)
        if (r[j] > a && r[j] < b) {
            x.push_back(r[j]);
            y.push_back(f[j]);
        }
    x.push_back(b);
    y.push_back(interpolate(r, f, b));
    return trapezoid(x, y);
}

// ---------------------------------------------------------------- weights

struct WeightPair {
    Field rho;
    Field rho_tilde;
    Field rho_hat;
    double eps = 0.0;
};

/// Per-node signs of w' and w'' (any real; only the sign matters through theta).
struct SignFields {
    std::vector<double> slope;
    std::vector<double> curvature;
};

inline SignFields sign_fields_from(const Field& w) {
    const std::size_t N = w.size();
    const double h = w.grid.h;
    SignFields s;
    s.slope.resize(N);
    s.curvature.resize(N);
    for (std::size_t j = 1; j + 1 < N; ++j) {
        s.slope[j] = (w[j + 1] - w[j - 1]) / (2.0 * h);
        s.curvature[j] = (w[j + 1] - 2.0 * w[j] + w[j - 1]) / (h * h);
    }
    s.slope[0] = (w[1] - w[0]) / h;
    s.slope[N - 1] = (w[N - 1] - w[N - 2]) / h;
    s.curvature[0] = s.curvature[1];
    s.curvature[N - 1] = s.curvature[N - 2];
    return s;
}

inline WeightPair divergence_weights(const RadialGrid& grid, const SignFields& signs, double eps,
                                     const PucciParams& params) {
    params.validate();
    const std::size_t N = grid.N;
    if (signs.slope.size() != N || signs.curvature.size() != N)
        throw InvalidArgument("sign fields do not match grid");
    const std::vector<double> r = grid.nodes();
    const double nm1 = static_cast<double>(params.n - 1);
    std::vector<double> k(N);
    for (std::size_t j = 0; j < N; ++j) {
        const double coef = theta(signs.slope[j], params) / theta(signs.curvature[j], params) * nm1;
        k[j] = coef == 0.0 ? 0.0 : coef / r[j];
    }
    std::vector<double> rho(N), rt(N), rh(N);
    double log_rho = 0.0;
    rho[N - 1] = 1.0;
    for (std::size_t j = N - 1; j-- > 0;) {
        log_rho -= 0.5 * (r[j + 1] - r[j]) * (k[j] + k[j + 1]);
        rho[j] = std::exp(log_rho);
    }
    const double expo = params.Lambda / params.lambda * nm1;
    for (std::size_t j = 0; j < N; ++j) {
        rt[j] = rho[j] / theta(signs.curvature[j], params);
        rh[j] = std::pow(0.5 * r[j], expo) / params.Lambda;
    }
    return WeightPair{Field(grid, rho), Field(grid, rt), Field(grid, rh), eps};
}

/// Weights from the discrete slopes and curvatures of w.
inline WeightPair divergence_weights(const Field& w, double eps, const PucciParams& params) {
    return divergence_weights(w.grid, sign_fields_from(w), eps, params);
}

// ---------------------------------------------------------------- z functional

inline double z_functional(const Field& w, const Field& phi, const Field& rho_tilde) {
    if (!w.grid.same_as(phi.grid) || !w.grid.same_as(rho_tilde.grid))
        throw InvalidArgument("z_functional: grids differ");
    std::vector<double> f(w.size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = w[j] * phi[j] * rho_tilde[j];
    return trapezoid(w.grid.nodes(), f);
}

/// z(t) along a solver run: u is interpolated onto the eigenfunction's annulus.
inline ZProbe make_z_probe(const EigenPair& pair, const Field& rho_tilde) {
    if (!pair.phi.grid.same_as(rho_tilde.grid)) throw InvalidArgument("z probe: weight grid differs");
    const RadialGrid ag = pair.phi.grid;
    const std::vector<double> ra = ag.nodes();
    std::vector<double> prod(ag.N);
    for (std::size_t j = 0; j < ag.N; ++j) prod[j] = pair.phi[j] * rho_tilde[j];
    return [ra, prod](const Field& u) {
        const std::vector<double> r = u.grid.nodes();
        std::vector<double> f(ra.size());
        for (std::size_t j = 0; j < ra.size(); ++j) f[j] = interpolate(r, u.values, ra[j]) * prod[j];
        return trapezoid(ra, f);
    };
}

/// Upper bound for z along any trajectory.
inline double z_upper_bound(double max_u0, double max_phi, const PucciParams& params, double eps) {
    return max_u0 * max_phi / params.lambda * (1.0 - 2.0 * eps);
}

struct ZInequalityFit {
    double C = 0.0;
    double worst_slack = 0.0;  // max of (-lambda1 z + C z^p) - zdot over the window
    std::size_t samples = 0;
};

/// Least-squares C in zdot + lambda1 z = C z^p over the pre-GBU window.
inline ZInequalityFit fit_z_inequality(const std::vector<std::pair<double, double>>& z_series, double lambda1,
                                       double p) {
    ZInequalityFit fit;
    double num = 0.0, den = 0.0;
    std::vector<std::array<double, 2>> pts;
    for (std::size_t k = 0; k + 1 < z_series.size(); ++k) {
        const double dt = z_series[k + 1].first - z_series[k].first;
        if (!(dt > 0.0)) continue;
        const double z = 0.5 * (z_series[k].second + z_series[k + 1].second);
        const double zdot = (z_series[k + 1].second - z_series[k].second) / dt;
        const double zp = std::pow(std::max(z, 0.0), p);
        num += (zdot + lambda1 * z) * zp;
        den += zp * zp;
        pts.push_back({z, zdot});
    }
    fit.C = den > 0.0 ? num / den : 0.0;
    fit.samples = pts.size();
    fit.worst_slack = -std::numeric_limits<double>::infinity();
    for (const auto& q : pts)
        fit.worst_slack = std::max(fit.worst_slack, -lambda1 * q[0] + fit.C * std::pow(std::max(q[0], 0.0), p) - q[1]);
    if (pts.empty()) fit.worst_slack = 0.0;
    return fit;
}

// ---------------------------------------------------------------- blow-up ODE

inline double blowup_threshold_M0(double C, double p, double t0, double t1) {
    if (!(p > 1.0)) throw InvalidArgument("blowup_threshold_M0: need p > 1");
    if (!(C > 0.0)) throw InvalidArgument("blowup_threshold_M0: need C > 0");
    if (!(t1 > t0)) throw InvalidArgument("blowup_threshold_M0: need t1 > t0");
    return std::pow(C * (p - 1.0) * (t1 - t0), -1.0 / (p - 1.0));
}

struct OdeResult {
    std::vector<std::pair<double, double>> series;
    std::optional<double> blowup_time;
};

/// RK4 for y' = -lambda1 y + C y^p with step halving whenever y changes by more than 5% in one step.
inline OdeResult integrate_blowup_ode(double y0, double C, double p, double lambda1, double t0, double dt,
                                      double t_end, double blowup_level = 1e12) {
    if (!(y0 >= 0.0)) throw InvalidArgument("integrate_blowup_ode: need y0 >= 0");
    if (!(dt > 0.0) || !(t_end > t0)) throw InvalidArgument("integrate_blowup_ode: bad time stepping");
    auto f = [&](double y) { return -lambda1 * y + C * std::pow(std::max(y, 0.0), p); };
    OdeResult res;
    double t = t0, y = y0, h = dt;
    res.series.emplace_back(t, y);
    while (t < t_end) {
        if (y >= blowup_level) {
            res.blowup_time = t;
            break;
        }
        const double hs = std::min(h, t_end - t);
        const double k1 = f(y);
        const double k2 = f(y + 0.5 * hs * k1);
        const double k3 = f(y + 0.5 * hs * k2);
        const double k4 = f(y + hs * k3);
        const double yn = y + hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(yn) || std::abs(yn - y) > 0.05 * std::max(y, 1e-300)) {
            if (hs < 1e-300 || y == 0.0) break;
            h = 0.5 * hs;
            continue;
        }
        t += hs;
        y = yn;
        res.series.emplace_back(t, y);
        h = std::min(dt, 2.0 * h);
    }
    if (!res.blowup_time && y >= blowup_level) res.blowup_time = t;
    return res;
}

// ---------------------------------------------------------------- largeness

struct LargenessResult {
    double integral = 0.0;
    bool satisfied = false;
};

/// Trapezoid integral of u0 over [delta, 1 - delta], optionally minus half of max u0.
inline LargenessResult largeness_criterion(const Field& u0, double delta, double M, bool general_g = false) {
    if (!(delta > 0.0) || !(delta < 0.5)) throw InvalidArgument("largeness: need 0 < delta < 1/2");
    const RadialGrid& g = u0.grid;
    if (g.r_min > delta || g.r_max < 1.0 - delta) throw InvalidArgument("largeness: grid must cover [delta, 1-delta]");
    std::vector<double> f = u0.values;
    if (general_g) {
        const double half = 0.5 * *std::max_element(f.begin(), f.end());
        for (double& x : f) x -= half;
    }
    LargenessResult out;
    out.integral = trapezoid_between(g.nodes(), f, delta, 1.0 - delta);
    out.satisfied = out.integral > M;
    return out;
}

// ---------------------------------------------------------------- Poincare

/// max over x of (1/nu(x)) * integral_x^end nu, the sharp constant for f vanishing at the left end.
inline double sharp_poincare_constant(const Field& nu) {
    const std::vector<double> r = nu.grid.nodes();
    const std::size_t N = r.size();
    for (double x : nu.values)
        if (!(x > 0.0)) throw InvalidArgument("Poincare weight must be positive");
    double tail = 0.0, best = 0.0;
    for (std::size_t j = N - 1; j-- > 0;) {
        tail += 0.5 * (r[j + 1] - r[j]) * (nu[j] + nu[j + 1]);
        best = std::max(best, tail / nu[j]);
    }
    return best;
}

struct PoincareReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double constant = 0.0;
};

/// For v vanishing at the right end: lhs = int |v| rho, rhs = int |v'| rho, constant = max (1/rho(x)) int_start^x rho.
inline PoincareReport weighted_poincare(const Field& v, const Field& rho) {
    if (!v.grid.same_as(rho.grid)) throw InvalidArgument("Poincare: grids differ");
    const RadialGrid& g = v.grid;
    double vmax = 0.0;
    for (double x : v.values) vmax = std::max(vmax, std::abs(x));
    if (std::abs(v.values.back()) > g.h * std::max(1.0, vmax))
        throw InvalidArgument("Poincare: v must vanish at the right endpoint");
    for (double x : rho.values)
        if (!(x > 0.0)) throw InvalidArgument("Poincare weight must be positive");
    const std::vector<double> r = g.nodes();
    const std::size_t N = r.size();
    PoincareReport out;
    std::vector<double> f(N);
    for (std::size_t j = 0; j < N; ++j) f[j] = std::abs(v[j]) * rho[j];
    out.lhs = trapezoid(r, f);
    double head = 0.0;
    for (std::size_t j = 0; j + 1 < N; ++j) {
        const double w = 0.5 * (rho[j] + rho[j + 1]);
        out.rhs += std::abs(v[j + 1] - v[j]) * w;
        head += (r[j + 1] - r[j]) * w;
        out.constant = std::max(out.constant, head / rho[j + 1]);
    }
    return out;
}

// ---------------------------------------------------------------- events

struct EventReport {
    std::optional<double> lobc_time;
    std::optional<double> gbu_time;
    std::vector<std::pair<double, double>> z_series;
    double threshold_used = 0.0;
};

inline EventReport detect_events(const Trajectory& traj, double lobc_tol, double grad_cap) {
    EventReport ev;
    ev.threshold_used = lobc_tol;
    for (const SeriesRecord& rec : traj.series) {
        if (!ev.lobc_time && rec.u_boundary > lobc_tol) ev.lobc_time = rec.t;
        if (!ev.gbu_time && rec.max_slope > grad_cap) ev.gbu_time = rec.t;
        if (rec.z) ev.z_series.emplace_back(rec.t, *rec.z);
    }
    return ev;
}

// ---------------------------------------------------------------- rescaling

inline double rescale_exponent(double p) {
    if (!(p > 1.0)) throw InvalidArgument("rescale: need p > 1");
    return (p - 2.0) / (p - 1.0);
}

/// Values times eta^k, radii times eta, times times eta^2, with k = (p-2)/(p-1).
inline Trajectory rescale_solution(const Trajectory& v, double eta, double p) {
    if (!(eta > 0.0)) throw InvalidArgument("rescale: need eta > 0");
    const double k = rescale_exponent(p);
    const double vs = std::pow(eta, k);
    const double ss = std::pow(eta, k - 1.0);
    const double ts = eta * eta;
    Trajectory out = v;
    for (Field& f : out.snapshots) {
        RadialGrid g = f.grid;
        g.r_min *= eta;
        g.r_max *= eta;
        g.h *= eta;
        f.grid = g;
        for (double& x : f.values) x *= vs;
        f.time *= ts;
    }
    for (SeriesRecord& rec : out.series) {
        rec.t *= ts;
        rec.u_boundary *= vs;
        rec.max_u *= vs;
        rec.u_tilde *= vs;
        rec.max_slope *= ss;
        rec.z.reset();
    }
    out.grad_cap *= ss;
    out.max_u0 *= vs;
    return out;
}

// ---------------------------------------------------------------- barrier

struct BarrierSet {
    double mu = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double A = 0.0;
    double C = 0.0;
    double eta = 0.0;
    double T_star = 0.0;
    double delta_prime = 0.0;
    double sphere_radius = 1.0;
    double mu_bound = 0.0;
    double K_min = 0.0;
    int halvings = 0;
    bool feasible = false;
    bool step3_ok = false;
};

/// Coefficient K(s) of the leading power in the supersolution inequality for phi(s) = s (s + mu)^(-beta).
inline double barrier_K(double s, double mu, double beta, double rho, const PucciParams& P) {
    const double nm1 = static_cast<double>(P.n - 1);
    return P.Lambda * beta * ((1.0 - beta) * s + 2.0 * mu) -
           P.lambda * nm1 / (s + rho) * ((1.0 - beta) * s + mu) * (s + mu);
}

inline BarrierSet barrier_constants(const PucciParams& params, double p, double sphere_radius, double u0_c1_norm,
                                    int max_halvings = 60, int collar_samples = 1000) {
    params.validate();
    if (!(p > 1.0)) throw InvalidArgument("barrier: need p > 1");
    if (!(sphere_radius > 0.0)) throw InvalidArgument("barrier: sphere radius must be positive");
    if (!(u0_c1_norm >= 0.0)) throw InvalidArgument("barrier: C1 norm must be nonnegative");
    const double rho = sphere_radius;
    const double nm1 = static_cast<double>(params.n - 1);
    BarrierSet b;
    b.sphere_radius = rho;
    b.beta = 0.5 * std::min(1.0, 1.0 / (2.0 * (p - 1.0)));
    b.mu_bound = params.n > 1 ? b.beta / (2.0 - b.beta) * (2.0 * params.Lambda * rho / (params.lambda * nm1)) : rho;
    const double expo = 2.0 - b.beta * (p - 1.0);
    for (int k = 1; k <= max_halvings; ++k) {
        const double mu = b.mu_bound * std::ldexp(1.0, -k);
        double kmin = std::numeric_limits<double>::infinity();
        bool ok = true;
        const double need = std::pow(2.0 * mu, expo);
        for (int i = 0; i <= collar_samples; ++i) {
            const double s = mu * static_cast<double>(i) / collar_samples;
            const double K = barrier_K(s, mu, b.beta, rho, params);
            kmin = std::min(kmin, K);
            if (!(K > 0.0) || K < need) ok = false;
        }
        b.halvings = k;
        b.mu = mu;
        b.K_min = kmin;
        if (ok) {
            b.feasible = true;
            break;
        }
    }
    b.eta = b.mu;
    if (!b.feasible) return b;

    b.gamma = params.n > 1 ? 2.0 * params.lambda * nm1 / (params.Lambda * rho) : 1.0;
    // psi is concave, so u0 <= c1 min(s, 1) <= C psi(s) on the collar once C psi(eta) >= c1
    b.C = 1.01 * std::max(u0_c1_norm, 1e-300) / (1.0 - std::exp(-b.gamma * b.eta));
    b.A = std::pow(b.C * b.gamma, p);

    const double phi_p0 = std::pow(b.mu, -b.beta);
    b.step3_ok = phi_p0 > b.C * b.gamma;
    if (b.step3_ok) {
        double best = 0.0;
        for (int i = 1; i <= collar_samples; ++i) {
            const double s = b.eta * static_cast<double>(i) / collar_samples;
            const double gap = s * std::pow(s + b.mu, -b.beta) - b.C * (1.0 - std::exp(-b.gamma * s));
            if (!(gap > 0.0)) break;
            if (gap > best) {
                best = gap;
                b.delta_prime = s;
            }
        }
        b.T_star = best / b.A;
        b.step3_ok = b.T_star > 0.0;
    }
    return b;
}

struct BarrierReport {
    double min_margin_step1 = std::numeric_limits<double>::infinity();  // -M(D2 v) - |Dv|^p
    double min_margin_step2 = std::numeric_limits<double>::infinity();  // A - M(D2 u) - |Du|^p
    double min_pucci_psi = std::numeric_limits<double>::infinity();    // -M(D2 u)
    double worst_s = 0.0;
    int samples = 0;
    bool ok = false;
};

/// Evaluates both barrier inequalities with analytic derivatives at interior collar points.
inline BarrierReport verify_barrier(const BarrierSet& b, const PucciParams& params, double p, int samples) {
    if (samples < 1) throw InvalidArgument("verify_barrier: need samples >= 1");
    if (!b.feasible) throw InvalidArgument("verify_barrier: barrier is not feasible");
    BarrierReport rep;
    rep.samples = samples;
    const double mu = b.mu, beta = b.beta, rho = b.sphere_radius;
    double worst_rel = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= samples; ++i) {
        const double s = b.eta * static_cast<double>(i) / (samples + 1);
        const double r = s + rho;
        const double dphi = ((1.0 - beta) * s + mu) * std::pow(s + mu, -beta - 1.0);
        const double ddphi = -beta * ((1.0 - beta) * s + 2.0 * mu) * std::pow(s + mu, -beta - 2.0);
        const double m1 = -pucci_minus_radial(ddphi, dphi, r, params) - std::pow(dphi, p);
        const double e = std::exp(-b.gamma * s);
        const double dpsi = b.C * b.gamma * e;
        const double ddpsi = -b.C * b.gamma * b.gamma * e;
        const double pm = -pucci_minus_radial(ddpsi, dpsi, r, params);
        const double m2 = b.A + pm - std::pow(dpsi, p);
        rep.min_margin_step1 = std::min(rep.min_margin_step1, m1);
        rep.min_margin_step2 = std::min(rep.min_margin_step2, m2);
        rep.min_pucci_psi = std::min(rep.min_pucci_psi, pm);
        const double rel = std::min({m1, m2, pm});
        if (rel < worst_rel) {
            worst_rel = rel;
            rep.worst_s = s;
        }
    }
    rep.ok = rep.min_margin_step1 >= 0.0 && rep.min_margin_step2 >= 0.0 && rep.min_pucci_psi >= 0.0;
    return rep;
}

// ---------------------------------------------------------------- general gradient terms

/// g*(s) = sup_{y in [0, cap]} (y s - g(y)); throws when the sup sits on the cap.
inline double convex_conjugate(const std::function<double(double)>& g, double s, double domain_cap) {
    const SupResult r = legendre_sup(g, s, domain_cap);
    if (r.at_cap) throw InvalidArgument("convex_conjugate: supremum attained at the cap; enlarge it");
    return r.value;
}

struct GrowthReport {
    std::vector<double> cutoffs;      // s_lo * 2^k
    std::vector<double> tails_h;      // integral of 1/(s h) over each dyadic block
    std::vector<double> tails_h1;     // integral of s/h1 over each dyadic block
    std::vector<double> partial_h;    // running integrals up to each cutoff
    std::vector<double> partial_h1;
    double decay_exponent_h = 0.0;    // tails behave like (log s)^(-q)
    double decay_exponent_h1 = 0.0;
    double remainder_h = 0.0;         // tail estimate beyond s_max (inf when divergent)
    double remainder_h1 = 0.0;
    bool convergent_h = false;
    bool convergent_h1 = false;
    std::vector<std::pair<double, double>> a_table;  // (s, a(s))
};

namespace detail {

/// Simpson in x = log s of f(e^x) e^x.
inline double log_simpson(const std::function<double(double)>& f, double s0, double s1, int m = 64) {
    const double x0 = std::log(s0), x1 = std::log(s1);
    const double dx = (x1 - x0) / m;
    double acc = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double x = x0 + i * dx;
        const double s = std::exp(x);
        const double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * f(s) * s;
    }
    return acc * dx / 3.0;
}

inline double tail_exponent(const std::vector<double>& cut, const std::vector<double>& tails) {
    const std::size_t m = tails.size();
    if (m < 4) return 0.0;
    const std::size_t a = m / 2, b = m - 1;
    auto mid = [&](std::size_t k) { return std::log(std::sqrt(cut[k] * cut[k + 1])); };
    if (!(tails[a] > 0.0) || !(tails[b] > 0.0)) return std::numeric_limits<double>::infinity();
    return std::log(tails[a] / tails[b]) / std::log(mid(b) / mid(a));
}

/// Inverse of an increasing g on [lo, hi], 0 < lo, by bisection in log scale.
inline double inverse_increasing(const std::function<double(double)>& g, double y, double lo, double hi) {
    for (int it = 0; it < 400; ++it) {
        const double m = std::sqrt(lo * hi);
        (g(m) < y ? lo : hi) = m;
        if (hi - lo <= 1e-14 * hi) break;
    }
    return std::sqrt(lo * hi);
}

}  // namespace detail

/// Convergence diagnostics for the integrals of 1/(s h(s)) and s/h1(s), h1 = s^2 h, on [s_lo, s_max].
inline GrowthReport growth_diagnostics(const std::function<double(double)>& h, double s_max,
                                       double s_lo = std::exp(1.0), double exponent_threshold = 1.1) {
    if (!(s_max > 4.0 * s_lo)) throw InvalidArgument("growth: s_max too small");
    {
        double prev = h(1.0);
        const int m = 2000;
        for (int i = 0; i <= m; ++i) {
            const double s = std::exp(std::log(s_max) * i / m);
            const double v = h(s);
            if (!std::isfinite(v) || v < prev * (1.0 - 1e-12) - 1e-300)
                throw InvalidArgument("growth: h must be nondecreasing");
            if (s >= s_lo && !(v > 0.0)) throw InvalidArgument("growth: h must be positive");
            prev = v;
        }
    }
    GrowthReport rep;
    auto f1 = [&](double s) { return 1.0 / (s * h(s)); };
    auto f2 = [&](double s) { return s / (s * s * h(s)); };
    double s = s_lo, acc1 = 0.0, acc2 = 0.0;
    rep.cutoffs.push_back(s);
    while (2.0 * s <= s_max) {
        const double t1 = detail::log_simpson(f1, s, 2.0 * s);
        const double t2 = detail::log_simpson(f2, s, 2.0 * s);
        acc1 += t1;
        acc2 += t2;
        rep.tails_h.push_back(t1);
        rep.tails_h1.push_back(t2);
        rep.partial_h.push_back(acc1);
        rep.partial_h1.push_back(acc2);
        s *= 2.0;
        rep.cutoffs.push_back(s);
    }
    rep.decay_exponent_h = detail::tail_exponent(rep.cutoffs, rep.tails_h);
    rep.decay_exponent_h1 = detail::tail_exponent(rep.cutoffs, rep.tails_h1);
    rep.convergent_h = rep.decay_exponent_h > exponent_threshold;
    rep.convergent_h1 = rep.decay_exponent_h1 > exponent_threshold;
    auto remainder = [&](double q, const std::vector<double>& tails) {
        if (!(q > exponent_threshold)) return std::numeric_limits<double>::infinity();
        if (std::isinf(q)) return 0.0;
        // sum over later blocks of T_K (k/K)^(-q) with k counting blocks in log s
        const double K = std::log(rep.cutoffs.back()) / std::log(2.0);
        return tails.back() * K / (q - 1.0);
    };
    rep.remainder_h = remainder(rep.decay_exponent_h, rep.tails_h);
    rep.remainder_h1 = remainder(rep.decay_exponent_h1, rep.tails_h1);

    // a(s) = sup_y g^{-1}(y s) / g^{-1}(y) with g(t) = t^2 h(t), y ranging where both inverses are defined
    auto g = [&](double t) { return t * t * h(t); };
    const double g_lo = g(s_lo), g_hi = g(s_max);
    for (double sv : {1.5, 2.0, 4.0, 8.0, 16.0, 64.0}) {
        double best = 0.0;
        const double y_hi = g_hi / sv;
        if (!(y_hi > g_lo)) break;
        const int m = 200;
        for (int i = 0; i <= m; ++i) {
            const double y = g_lo * std::pow(y_hi / g_lo, static_cast<double>(i) / m);
            const double num = detail::inverse_increasing(g, y * sv, s_lo, s_max);
            const double den = detail::inverse_increasing(g, y, s_lo, s_max);
            best = std::max(best, num / den);
        }
        rep.a_table.emplace_back(sv, best);
    }
    return rep;
}

}  // namespace lobc
