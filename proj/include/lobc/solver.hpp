#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lobc/core.hpp"
#include "lobc/pucci.hpp"

namespace lobc {

struct SchemeConfig {
    double cfl_safety = 0.5;
    double grad_cap = 0.0;  // 0 means 1e4 * (initial max slope + 1)
    std::optional<BoundaryMode> boundary_mode;  // overrides ProblemSpec when set
    double t_max = 1.0;
    std::size_t snapshot_stride = 1000;
    std::size_t series_stride = 1;
    double lobc_latch = 0.0;  // stop once u(R) exceeds this; 0 disables
    std::size_t max_steps = 50'000'000;

    void validate() const {
        if (!(cfl_safety > 0.0) || cfl_safety > 1.0) throw InvalidArgument("cfl_safety must lie in (0, 1]");
        if (grad_cap < 0.0) throw InvalidArgument("grad_cap must be positive");
        if (!(t_max > 0.0)) throw InvalidArgument("t_max must be positive");
        if (snapshot_stride == 0 || series_stride == 0) throw InvalidArgument("strides must be positive");
        if (lobc_latch < 0.0) throw InvalidArgument("lobc_latch must be nonnegative");
        if (max_steps == 0) throw InvalidArgument("max_steps must be positive");
    }
};

struct SeriesRecord {
    double t = 0.0;
    double u_boundary = 0.0;
    double max_u = 0.0;
    double max_slope = 0.0;
    std::optional<double> z;
    double u_tilde = 0.0;  // boundary value before the Dirichlet projection
};

enum class StopReason { t_max, gbu, lobc_latch, step_limit };

inline const char* to_string(StopReason s) {
    switch (s) {
    case StopReason::t_max: return "t_max";
    case StopReason::gbu: return "gbu";
    case StopReason::lobc_latch: return "lobc_latch";
    case StopReason::step_limit: return "step_limit";
    }
    return "unknown";
}

struct Trajectory {
    std::vector<Field> snapshots;
    std::vector<SeriesRecord> series;
    StopReason stop = StopReason::t_max;
    std::size_t steps = 0;
    double grad_cap = 0.0;
    double max_u0 = 0.0;
};

using ZProbe = std::function<double(const Field&)>;

inline double max_slope(const std::vector<double>& u, double h) {
    double m = 0.0;
    for (std::size_t j = 0; j + 1 < u.size(); ++j) m = std::max(m, std::abs(u[j + 1] - u[j]));
    return m / h;
}

inline double max_slope(const Field& u) { return max_slope(u.values, u.grid.h); }

inline double cfl_dt(const std::vector<double>& u, double h, const ProblemSpec& spec, const SchemeConfig& cfg) {
    const PucciParams& P = spec.params;
    const double n = static_cast<double>(P.n);
    const double second = std::max(2.0 * P.Lambda + (n - 1.0) * P.Lambda, 2.0 * n * P.Lambda) / (h * h);
    const double LH = spec.hamiltonian.derivative(max_slope(u, h));
    return cfg.cfl_safety / (second + LH / h);
}

/// Largest stable explicit step for this state.
inline double cfl_dt(const Field& state, const ProblemSpec& spec, const SchemeConfig& cfg) {
    if (!state.finite()) throw InvalidArgument("cfl_dt: state must be finite");
    return cfl_dt(state.values, state.grid.h, spec, cfg);
}

namespace detail {

/// Godunov flux for +g(|q|) from backward slope qm and forward slope qp.
inline double godunov(double qm, double qp, const Hamiltonian& H) {
    if (qm <= qp) return H.value(std::max(std::abs(qm), std::abs(qp)));
    if (qp <= 0.0 && 0.0 <= qm) return 0.0;
    return H.value(std::min(std::abs(qm), std::abs(qp)));
}

/// Boundary flux with the outward neighbour eliminated; sigma is the inward difference quotient.
inline double boundary_flux(double sigma, double h, double cB, const PucciParams& P, const Hamiltonian& H) {
    const double ab[2] = {P.lambda, P.Lambda};
    double best = std::numeric_limits<double>::infinity();
    for (double a : ab) {
        for (double b : ab) {
            const double alpha0 = 2.0 * a / h + b * cB;
            double s;
            if (sigma > 0.0 && H.derivative(sigma) >= alpha0)
                s = H.value(sigma);
            else
                s = alpha0 * sigma - H.conjugate(alpha0);
            best = std::min(best, s - b * cB * sigma);
        }
    }
    return best;
}

/// One forward-Euler update of u into out; returns the unprojected boundary value.
inline double step_kernel(const std::vector<double>& u, std::vector<double>& out, const RadialGrid& g, double dt,
                          const ProblemSpec& spec, BoundaryMode mode) {
    const PucciParams& P = spec.params;
    const Hamiltonian& H = spec.hamiltonian;
    const std::size_t N = u.size();
    const double h = g.h;
    const double ih = 1.0 / h, ih2 = 1.0 / (h * h);
    const double nm1 = static_cast<double>(P.n - 1);

    {
        // even reflection u_{-1} = u_1
        const double qp = (u[1] - u[0]) * ih;
        const double d2 = 2.0 * (u[1] - u[0]) * ih2;
        out[0] = u[0] + dt * (origin_limit(d2, P) + godunov(0.0, qp, H));
    }
    for (std::size_t j = 1; j + 1 < N; ++j) {
        const double qm = (u[j] - u[j - 1]) * ih;
        const double qp = (u[j + 1] - u[j]) * ih;
        const double d2 = (u[j + 1] - 2.0 * u[j] + u[j - 1]) * ih2;
        const double c = nm1 / g.node(j);
        const double lin = theta(d2, P) * d2 + theta(qp, P) * c * qp;
        out[j] = u[j] + dt * (lin + godunov(qm, qp, H));
    }
    const double sigma = (u[N - 2] - u[N - 1]) * ih;
    const double ut = u[N - 1] + dt * boundary_flux(sigma, h, nm1 / g.r_max, P, H);
    out[N - 1] = mode == BoundaryMode::generalized ? std::max(0.0, ut) : 0.0;
    return ut;
}

inline void check_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) throw NumericalError("non-finite value in explicit update");
}

}  // namespace detail

struct StepResult {
    Field state;
    double u_tilde = 0.0;
};

inline StepResult step_ex(const Field& state, double dt, const ProblemSpec& spec, const SchemeConfig& cfg) {
    if (state.grid.r_min != 0.0) throw InvalidArgument("step: grid must start at the origin");
    if (!state.finite()) throw InvalidArgument("step: state must be finite");
    if (!(dt > 0.0)) throw InvalidArgument("step: dt must be positive");
    const double lim = cfl_dt(state, spec, cfg);
    if (dt > lim * (1.0 + 1e-12)) throw InvalidArgument("step: dt exceeds the CFL limit");
    std::vector<double> out(state.size());
    const BoundaryMode mode = cfg.boundary_mode.value_or(spec.boundary_mode);
    const double ut = detail::step_kernel(state.values, out, state.grid, dt, spec, mode);
    detail::check_finite(out);
    return {Field(state.grid, std::move(out), state.time + dt), ut};
}

inline Field step(const Field& state, double dt, const ProblemSpec& spec, const SchemeConfig& cfg) {
    return step_ex(state, dt, spec, cfg).state;
}

inline Trajectory evolve(const ProblemSpec& spec, const RadialGrid& grid, const SchemeConfig& cfg,
                         const ZProbe& z_probe = {}) {
    cfg.validate();
    Field u = sample_initial_data(spec, grid);
    const BoundaryMode mode = cfg.boundary_mode.value_or(spec.boundary_mode);
    const double s0 = max_slope(u);
    Trajectory tr;
    tr.grad_cap = cfg.grad_cap > 0.0 ? cfg.grad_cap : 1e4 * (s0 + 1.0);
    tr.max_u0 = *std::max_element(u.values.begin(), u.values.end());

    auto record = [&](const std::vector<double>& v, double t, double ut, double slope) {
        SeriesRecord rec;
        rec.t = t;
        rec.u_boundary = v.back();
        rec.max_u = *std::max_element(v.begin(), v.end());
        rec.max_slope = slope;
        rec.u_tilde = ut;
        if (z_probe) rec.z = z_probe(Field(grid, v, t));
        tr.series.push_back(rec);
    };

    std::vector<double> cur = u.values, next(cur.size());
    double t = 0.0;
    double slope = s0;
    record(cur, t, cur.back(), slope);
    tr.snapshots.push_back(u);

    std::size_t k = 0;
    while (true) {
        if (slope >= tr.grad_cap) { tr.stop = StopReason::gbu; break; }
        if (cfg.lobc_latch > 0.0 && cur.back() > cfg.lobc_latch) { tr.stop = StopReason::lobc_latch; break; }
        if (t >= cfg.t_max) { tr.stop = StopReason::t_max; break; }
        if (k >= cfg.max_steps) { tr.stop = StopReason::step_limit; break; }
        double dt = cfl_dt(cur, grid.h, spec, cfg);
        bool last = false;
        if (t + dt >= cfg.t_max) { dt = cfg.t_max - t; last = true; }
        const double ut = detail::step_kernel(cur, next, grid, dt, spec, mode);
        detail::check_finite(next);
        cur.swap(next);
        t = last ? cfg.t_max : t + dt;
        ++k;
        slope = max_slope(cur, grid.h);
        const bool stopping = last || slope >= tr.grad_cap || k >= cfg.max_steps ||
                              (cfg.lobc_latch > 0.0 && cur.back() > cfg.lobc_latch);
        if (k % cfg.series_stride == 0 || stopping) record(cur, t, ut, slope);
        if (k % cfg.snapshot_stride == 0 || stopping) tr.snapshots.emplace_back(grid, cur, t);
    }
    tr.steps = k;
    return tr;
}

}  // namespace lobc
