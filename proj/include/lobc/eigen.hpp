#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "lobc/core.hpp"
#include "lobc/pucci.hpp"

namespace lobc {

struct PolicyChoice {
    double a = 0.0;
    double b = 0.0;
    bool operator==(const PolicyChoice& o) const { return a == o.a && b == o.b; }
};

/// One (a, b) pair per interior node.
using Policy = std::vector<PolicyChoice>;

/// Solves sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i] in place of rhs.
inline void thomas_solve(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                         std::vector<double>& rhs) {
    const std::size_t m = diag.size();
    for (std::size_t i = 1; i < m; ++i) {
        if (diag[i - 1] == 0.0) throw NumericalError("singular tridiagonal system");
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    if (diag[m - 1] == 0.0) throw NumericalError("singular tridiagonal system");
    rhs[m - 1] /= diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

struct BvpResult {
    Field phi;
    int iterations = 0;
    double residual = 0.0;
};

namespace detail {

/// min over (a, b) of a D2 phi_j + b (n-1)/r_j D+ phi_j at interior node j.
inline double discrete_pucci(const std::vector<double>& phi, std::size_t j, double r, double h,
                             const PucciParams& params) {
    const double d2 = (phi[j + 1] - 2.0 * phi[j] + phi[j - 1]) / (h * h);
    const double dp = (phi[j + 1] - phi[j]) / h;
    const double c = static_cast<double>(params.n - 1) / r;
    return theta(d2, params) * d2 + theta(dp, params) * c * dp;
}

}  // namespace detail

/// Howard policy iteration for min_{a,b}(a phi'' + b (n-1)/r phi') = -f with zero end values.
inline BvpResult solve_pucci_bvp_ex(const Field& f, const RadialGrid& annulus, const PucciParams& params, double tol,
                                    int max_iterations = 60) {
    params.validate();
    if (!f.grid.same_as(annulus)) throw InvalidArgument("right-hand side grid differs from annulus");
    if (!f.finite()) throw InvalidArgument("right-hand side must be finite");
    const std::size_t N = annulus.N;
    const std::size_t m = N - 2;
    const double h = annulus.h;
    const std::vector<double> r = annulus.nodes();
    Policy pol(m, PolicyChoice{params.Lambda, params.Lambda});
    std::vector<double> phi(N, 0.0);
    std::vector<double> sub(m), diag(m), sup(m), rhs(m);
    double fscale = 1.0;
    for (double x : f.values) fscale = std::max(fscale, std::abs(x));

    double residual = 0.0;
    for (int it = 1; it <= max_iterations; ++it) {
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + 1;
            const double a = pol[i].a / (h * h);
            const double bc = pol[i].b * static_cast<double>(params.n - 1) / (r[j] * h);
            sub[i] = -a;
            diag[i] = 2.0 * a + bc;
            sup[i] = -(a + bc);
            rhs[i] = f.values[j];
        }
        thomas_solve(sub, diag, sup, rhs);
        for (std::size_t i = 0; i < m; ++i) phi[i + 1] = rhs[i];

        bool stable = true;
        residual = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + 1;
            const double d2 = (phi[j + 1] - 2.0 * phi[j] + phi[j - 1]) / (h * h);
            const double dp = (phi[j + 1] - phi[j]) / h;
            PolicyChoice next{theta(d2, params), theta(dp, params)};
            // keep the current choice on ties so the iteration cannot cycle
            const double c = static_cast<double>(params.n - 1) / r[j];
            const double cur = pol[i].a * d2 + pol[i].b * c * dp;
            const double best = next.a * d2 + next.b * c * dp;
            if (best < cur && !(next == pol[i])) {
                pol[i] = next;
                stable = false;
            }
            residual = std::max(residual, std::abs(best + f.values[j]));
        }
        if (stable) {
            if (residual > tol * fscale)
                throw ConvergenceError("policy iteration stalled above tolerance", residual);
            return BvpResult{Field(annulus, phi, f.time), it, residual};
        }
    }
    throw ConvergenceError("policy iteration did not converge in " + std::to_string(max_iterations) + " steps",
                           residual);
}

inline Field solve_pucci_bvp(const Field& f, const RadialGrid& annulus, const PucciParams& params, double tol) {
    return solve_pucci_bvp_ex(f, annulus, params, tol).phi;
}

struct EigenPair {
    double lambda1 = 0.0;
    Field phi;
    double eps = 0.0;
    int iterations = 0;
    double residual = 0.0;
    double lambda_lower = 0.0;  // Collatz-Wielandt bracket at the last step
    double lambda_upper = 0.0;
};

inline std::size_t node_nearest(const RadialGrid& g, double x) {
    const double t = std::round((x - g.r_min) / g.h);
    if (t <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(t), g.N - 1);
}

/// Relative residual max |-M_h phi - lambda phi| / (lambda max phi).
inline double eigen_residual(const Field& phi, double lambda1, const PucciParams& params) {
    const RadialGrid& g = phi.grid;
    const std::vector<double> r = g.nodes();
    double res = 0.0, scale = 0.0;
    for (std::size_t j = 1; j + 1 < g.N; ++j) {
        res = std::max(res, std::abs(-detail::discrete_pucci(phi.values, j, r[j], g.h, params) - lambda1 * phi[j]));
        scale = std::max(scale, std::abs(phi[j]));
    }
    return res / (lambda1 * scale);
}

/// Inverse power iteration on the annulus (eps, 1 - eps).
inline EigenPair principal_eigenpair(double eps, const PucciParams& params, std::size_t N, double tol,
                                     int max_iterations = 500, double bump_scale = 1.0) {
    params.validate();
    if (!(eps >= 0.0) || !(eps < 0.25)) throw InvalidArgument("eigen: need 0 <= eps < 1/4");
    if (N < 51) throw InvalidArgument("eigen: need N >= 51");
    if (!(tol > 0.0)) throw InvalidArgument("eigen: tol must be positive");
    const RadialGrid g = make_grid(eps, 1.0 - eps, N);
    const std::vector<double> r = g.nodes();
    std::vector<double> phi(N, 0.0);
    for (std::size_t j = 1; j + 1 < N; ++j) phi[j] = bump_scale * (r[j] - eps) * (1.0 - eps - r[j]);

    double lam = 0.0, lo = 0.0, hi = 0.0;
    for (int it = 1; it <= max_iterations; ++it) {
        double mx = 0.0;
        for (double x : phi) mx = std::max(mx, x);
        std::vector<double> psi(N);
        for (std::size_t j = 0; j < N; ++j) psi[j] = phi[j] / mx;
        Field next = solve_pucci_bvp(Field(g, psi), g, params, 1e-9);
        lo = std::numeric_limits<double>::infinity();
        hi = 0.0;
        for (std::size_t j = 1; j + 1 < N; ++j) {
            if (!(next[j] > 0.0)) throw NumericalError("eigenfunction lost positivity; refine the grid");
            const double q = psi[j] / next[j];
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        const double prev = lam;
        lam = hi;
        phi = next.values;
        if (it > 1 && std::abs(lam - prev) <= tol * lam && (hi - lo) <= tol * lam) {
            const std::size_t jm = node_nearest(g, 0.5);
            const double s = phi[jm];
            for (double& x : phi) x /= s;
            EigenPair out;
            out.lambda1 = lam;
            out.phi = Field(g, phi);
            out.eps = eps;
            out.iterations = it;
            out.lambda_lower = lo;
            out.lambda_upper = hi;
            out.residual = eigen_residual(out.phi, lam, params);
            return out;
        }
    }
    throw ConvergenceError("inverse power iteration did not converge", (hi - lo) / std::max(lam, 1e-300));
}

/// Quadrature of phi^(-alpha) * weight; panels touching a zero of phi use the linear model there.
inline double eigen_integrability_check(const EigenPair& pair, double alpha, const Field& weights) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    const Field& phi = pair.phi;
    if (!weights.grid.same_as(phi.grid)) throw InvalidArgument("weights grid differs from eigenfunction grid");
    const std::size_t N = phi.size();
    const double h = phi.grid.h;
    for (std::size_t j = 1; j + 1 < N; ++j)
        if (!(phi[j] > 0.0)) throw InvalidArgument("eigenfunction must be positive inside");
    auto integrand = [&](std::size_t j) { return std::pow(phi[j], -alpha) * weights[j]; };
    double total = 0.0;
    for (std::size_t j = 1; j + 2 < N; ++j) total += 0.5 * h * (integrand(j) + integrand(j + 1));
    auto end_panel = [&](std::size_t e, std::size_t in) {
        if (phi[e] > 0.0) return 0.5 * h * (integrand(e) + integrand(in));
        const double s0 = phi[in] / h;
        return weights[in] * std::pow(s0, -alpha) * std::pow(h, 1.0 - alpha) / (1.0 - alpha);
    };
    total += end_panel(0, 1);
    total += end_panel(N - 1, N - 2);
    return total;
}

}  // namespace lobc
