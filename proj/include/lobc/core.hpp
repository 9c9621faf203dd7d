#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lobc/hamiltonian.hpp"

namespace lobc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Iterative method failed to settle; `last_residual` is what it got to.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

struct PucciParams {
    double lambda = 1.0;
    double Lambda = 1.0;
    int n = 1;

    void validate() const {
        if (!(lambda > 0.0) || !(Lambda >= lambda) || !std::isfinite(Lambda))
            throw InvalidArgument("ellipticity must satisfy 0 < lambda <= Lambda");
        if (n < 1) throw InvalidArgument("dimension n must be >= 1");
    }
};

struct RadialGrid {
    double r_min = 0.0;
    double r_max = 1.0;
    std::size_t N = 0;
    double h = 0.0;

    double node(std::size_t j) const {
        if (j + 1 == N) return r_max;
        return r_min + static_cast<double>(j) * h;
    }

    std::vector<double> nodes() const {
        std::vector<double> r(N);
        for (std::size_t j = 0; j < N; ++j) r[j] = node(j);
        return r;
    }

    bool same_as(const RadialGrid& o) const {
        return N == o.N && r_min == o.r_min && r_max == o.r_max;
    }
};

inline RadialGrid make_grid(double r_min, double r_max, std::size_t N) {
    if (N < 3) throw InvalidArgument("grid needs at least 3 nodes");
    if (!std::isfinite(r_min) || !std::isfinite(r_max) || r_min < 0.0 || !(r_max > r_min))
        throw InvalidArgument("grid interval must satisfy r_max > r_min >= 0");
    RadialGrid g;
    g.r_min = r_min;
    g.r_max = r_max;
    g.N = N;
    g.h = (r_max - r_min) / static_cast<double>(N - 1);
    return g;
}

struct Field {
    RadialGrid grid;
    std::vector<double> values;
    double time = 0.0;

    Field() = default;
    Field(RadialGrid g, std::vector<double> v, double t = 0.0)
        : grid(g), values(std::move(v)), time(t) {
        if (values.size() != grid.N) throw InvalidArgument("field length does not match grid");
    }

    static Field zeros(const RadialGrid& g, double t = 0.0) {
        return Field(g, std::vector<double>(g.N, 0.0), t);
    }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t j) { return values[j]; }
    double operator[](std::size_t j) const { return values[j]; }

    bool finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

enum class BoundaryMode { generalized, classical };

enum class InitialFamily { cutoff_plateau, cone, custom_samples };

struct InitialData {
    InitialFamily family = InitialFamily::cutoff_plateau;
    double amplitude = 1.0;
    std::vector<double> samples;  // custom_samples only

    static InitialData cutoff(double C) { return {InitialFamily::cutoff_plateau, C, {}}; }
    static InitialData cone(double C) { return {InitialFamily::cone, C, {}}; }
    static InitialData custom(std::vector<double> s) {
        return {InitialFamily::custom_samples, 0.0, std::move(s)};
    }
};

/// Smooth radial cut-off: 1 on [0, 2R/3], 0 on [3R/4, R], cubic smoothstep between.
inline double cutoff_profile(double r, double R) {
    const double a = 2.0 * R / 3.0;
    const double b = 0.75 * R;
    if (r <= a) return 1.0;
    if (r >= b) return 0.0;
    const double t = (r - a) / (b - a);
    return 1.0 - t * t * (3.0 - 2.0 * t);
}

struct ProblemSpec {
    PucciParams params;
    Hamiltonian hamiltonian = Hamiltonian::power_law(2.0);
    double radius = 1.0;
    InitialData u0;
    BoundaryMode boundary_mode = BoundaryMode::generalized;

    void validate() const {
        params.validate();
        if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("radius must be positive");
        if (u0.family != InitialFamily::custom_samples && !(u0.amplitude >= 0.0))
            throw InvalidArgument("initial amplitude must be nonnegative");
    }
};

inline Field sample_initial_data(const ProblemSpec& spec, const RadialGrid& grid) {
    spec.validate();
    if (grid.r_min != 0.0 || std::abs(grid.r_max - spec.radius) > 1e-12 * spec.radius)
        throw InvalidArgument("grid must cover [0, radius]");
    const double R = spec.radius;
    std::vector<double> v(grid.N, 0.0);
    switch (spec.u0.family) {
    case InitialFamily::cutoff_plateau:
        for (std::size_t j = 0; j < grid.N; ++j)
            v[j] = spec.u0.amplitude * cutoff_profile(grid.node(j), R);
        break;
    case InitialFamily::cone:
        for (std::size_t j = 0; j < grid.N; ++j)
            v[j] = spec.u0.amplitude * (1.0 - grid.node(j) / R);
        v.back() = 0.0;
        break;
    case InitialFamily::custom_samples:
        if (spec.u0.samples.size() != grid.N)
            throw InvalidArgument("custom initial samples: length " + std::to_string(spec.u0.samples.size()) +
                                  " does not match grid size " + std::to_string(grid.N));
        v = spec.u0.samples;
        for (double x : v)
            if (!std::isfinite(x) || x < 0.0)
                throw InvalidArgument("custom initial samples must be finite and nonnegative");
        if (v.back() != 0.0) throw InvalidArgument("custom initial samples must vanish at r = radius");
        break;
    }
    return Field(grid, std::move(v), 0.0);
}

}  // namespace lobc
