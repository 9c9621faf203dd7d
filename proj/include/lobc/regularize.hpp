#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "lobc/core.hpp"

namespace lobc {

/// Samples u(r_j, t_k) stored row-major by time.
struct SpaceTimeField {
    RadialGrid grid;
    std::vector<double> times;
    std::vector<double> values;
    std::vector<char> valid;  // per time row

    SpaceTimeField() = default;
    SpaceTimeField(RadialGrid g, std::vector<double> t, std::vector<double> v)
        : grid(g), times(std::move(t)), values(std::move(v)), valid(times.size(), 1) {
        if (times.empty()) throw InvalidArgument("space-time field needs at least one time");
        if (values.size() != times.size() * grid.N) throw InvalidArgument("space-time field dimensions inconsistent");
        for (std::size_t k = 1; k < times.size(); ++k)
            if (!(times[k] > times[k - 1])) throw InvalidArgument("times must be strictly increasing");
        for (double x : values)
            if (!std::isfinite(x)) throw InvalidArgument("space-time field values must be finite");
    }

    /// Single time slice at t.
    static SpaceTimeField from_field(const Field& f) {
        return SpaceTimeField(f.grid, {f.time}, f.values);
    }

    std::size_t nt() const { return times.size(); }
    std::size_t nx() const { return grid.N; }
    double& at(std::size_t k, std::size_t j) { return values[k * grid.N + j]; }
    double at(std::size_t k, std::size_t j) const { return values[k * grid.N + j]; }

    Field row(std::size_t k) const {
        return Field(grid, std::vector<double>(values.begin() + k * grid.N, values.begin() + (k + 1) * grid.N),
                     times[k]);
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : values) m = std::max(m, std::abs(x));
        return m;
    }
    double min_value() const { return *std::min_element(values.begin(), values.end()); }
    double max_value() const { return *std::max_element(values.begin(), values.end()); }
};

enum class ConvMethod { envelope, brute };

namespace detail {

/// out[i] = min_j f[j] + (x[i] - y[j])^2 / (2 eps), brute force.
inline void min_plus_brute(const double* y, const double* f, std::size_t m, const double* x, double* out,
                           std::size_t nx, double eps, std::ptrdiff_t fstride = 1, std::ptrdiff_t ostride = 1) {
    const double c = 0.5 / eps;
    for (std::size_t i = 0; i < nx; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            const double d = x[i] - y[j];
            const double v = f[j * fstride] + c * d * d;
            if (v < best) best = v;
        }
        out[i * ostride] = best;
    }
}

/// Same minimum via the lower envelope of parabolas; y and x increasing.
inline void min_plus_envelope(const double* y, const double* f, std::size_t m, const double* x, double* out,
                              std::size_t nx, double eps, std::ptrdiff_t fstride = 1, std::ptrdiff_t ostride = 1) {
    const double c = 0.5 / eps;
    std::vector<std::size_t> v(m);
    std::vector<double> z(m + 1);
    auto key = [&](std::size_t j) { return f[j * fstride] + c * y[j] * y[j]; };
    auto cross = [&](std::size_t a, std::size_t b) {
        return (key(b) - key(a)) / (2.0 * c * (y[b] - y[a]));
    };
    std::size_t k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (std::size_t q = 1; q < m; ++q) {
        double s = cross(v[k], q);
        while (s <= z[k]) {
            --k;
            s = cross(v[k], q);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    const std::size_t last = k;
    k = 0;
    for (std::size_t i = 0; i < nx; ++i) {
        while (z[k + 1] < x[i]) ++k;
        // neighbouring parabolas can tie to round-off at breakpoints
        double best = std::numeric_limits<double>::infinity();
        const std::size_t lo = k > 0 ? k - 1 : 0;
        const std::size_t hi = std::min(k + 1, last);
        for (std::size_t kk = lo; kk <= hi; ++kk) {
            const std::size_t j = v[kk];
            const double d = x[i] - y[j];
            const double val = f[j * fstride] + c * d * d;
            if (val < best) best = val;
        }
        out[i * ostride] = best;
    }
}

inline void min_plus(ConvMethod m, const double* y, const double* f, std::size_t n, const double* x, double* out,
                     std::size_t nx, double eps, std::ptrdiff_t fstride = 1, std::ptrdiff_t ostride = 1) {
    if (m == ConvMethod::brute)
        min_plus_brute(y, f, n, x, out, nx, eps, fstride, ostride);
    else
        min_plus_envelope(y, f, n, x, out, nx, eps, fstride, ostride);
}

}  // namespace detail

/// Half-width of the time window spoiled by the time convolution.
inline double time_margin(double kappa, double max_abs_u) { return 2.0 * std::sqrt(kappa * max_abs_u); }

/// inf over grid nodes (and time samples when kappa is given) of
/// u(y, s) + |x - y|^2 / (2 eps) + |t - s|^2 / (2 kappa).
inline SpaceTimeField inf_convolution(const SpaceTimeField& u, double eps, std::optional<double> kappa = std::nullopt,
                                      ConvMethod method = ConvMethod::envelope) {
    if (!(eps > 0.0)) throw InvalidArgument("inf_convolution: eps must be positive");
    if (kappa && !(*kappa > 0.0)) throw InvalidArgument("inf_convolution: kappa must be positive");
    SpaceTimeField out = u;
    const std::vector<double> r = u.grid.nodes();
    const std::size_t N = u.nx(), T = u.nt();
    for (std::size_t k = 0; k < T; ++k)
        detail::min_plus(method, r.data(), u.values.data() + k * N, N, r.data(), out.values.data() + k * N, N, eps);
    if (kappa && T > 1) {
        std::vector<double> col(T), res(T);
        for (std::size_t j = 0; j < N; ++j) {
            for (std::size_t k = 0; k < T; ++k) col[k] = out.at(k, j);
            detail::min_plus(method, u.times.data(), col.data(), T, u.times.data(), res.data(), T, *kappa);
            for (std::size_t k = 0; k < T; ++k) out.at(k, j) = res[k];
        }
        const double m = time_margin(*kappa, u.max_abs());
        const double t0 = u.times.front(), t1 = u.times.back();
        for (std::size_t k = 0; k < T; ++k)
            out.valid[k] = (u.valid[k] && u.times[k] > t0 + m && u.times[k] < t1 - m) ? 1 : 0;
    }
    return out;
}

inline SpaceTimeField negate(SpaceTimeField u) {
    for (double& x : u.values) x = -x;
    return u;
}

/// sup over grid nodes of u(y, t) - |x - y|^2 / (2 eps); space only.
inline SpaceTimeField sup_convolution(const SpaceTimeField& u, double eps, ConvMethod method = ConvMethod::envelope) {
    return negate(inf_convolution(negate(u), eps, std::nullopt, method));
}

/// u_{eps,kappa} evaluated at an arbitrary radius x and time row k.
inline double inf_convolution_at(const SpaceTimeField& u, double eps, std::optional<double> kappa, double x,
                                 std::size_t k) {
    const std::vector<double> r = u.grid.nodes();
    const std::size_t N = u.nx();
    const double c = 0.5 / eps;
    auto space_min = [&](std::size_t row) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < N; ++j) {
            const double d = x - r[j];
            best = std::min(best, u.at(row, j) + c * d * d);
        }
        return best;
    };
    if (!kappa || u.nt() == 1) return space_min(k);
    const double ck = 0.5 / *kappa;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < u.nt(); ++s) {
        const double d = u.times[k] - u.times[s];
        best = std::min(best, space_min(s) + ck * d * d);
    }
    return best;
}

/// (u_{eps+delta,kappa})^delta, requiring delta <= eps^(p/2).
inline SpaceTimeField lasry_lions_w(const SpaceTimeField& u, double eps, double delta, double kappa, double p,
                                    ConvMethod method = ConvMethod::envelope) {
    if (!(eps > 0.0) || !(delta > 0.0)) throw InvalidArgument("lasry_lions_w: eps and delta must be positive");
    if (delta > std::pow(eps, 0.5 * p)) throw InvalidArgument("lasry_lions_w: need delta <= eps^(p/2)");
    return sup_convolution(inf_convolution(u, eps + delta, kappa, method), delta, method);
}

/// Largest |forward difference| per row, over rows flagged valid.
inline double max_spatial_slope(const SpaceTimeField& u) {
    double m = 0.0;
    const std::vector<double> r = u.grid.nodes();
    for (std::size_t k = 0; k < u.nt(); ++k) {
        if (!u.valid[k]) continue;
        for (std::size_t j = 0; j + 1 < u.nx(); ++j)
            m = std::max(m, std::abs(u.at(k, j + 1) - u.at(k, j)) / (r[j + 1] - r[j]));
    }
    return m;
}

inline double max_temporal_slope(const SpaceTimeField& u) {
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < u.nt(); ++k) {
        if (!u.valid[k] || !u.valid[k + 1]) continue;
        const double dt = u.times[k + 1] - u.times[k];
        for (std::size_t j = 0; j < u.nx(); ++j) m = std::max(m, std::abs(u.at(k + 1, j) - u.at(k, j)) / dt);
    }
    return m;
}

/// Largest centered second difference over interior nodes of valid rows.
inline double max_second_difference(const SpaceTimeField& u) {
    double m = -std::numeric_limits<double>::infinity();
    const double h = u.grid.h;
    for (std::size_t k = 0; k < u.nt(); ++k) {
        if (!u.valid[k]) continue;
        for (std::size_t j = 1; j + 1 < u.nx(); ++j)
            m = std::max(m, (u.at(k, j + 1) - 2.0 * u.at(k, j) + u.at(k, j - 1)) / (h * h));
    }
    return m;
}

inline double min_second_difference(const SpaceTimeField& u) { return -max_second_difference(negate(u)); }

}  // namespace lobc
