#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lobc/solver.hpp"
#include "oracles.hpp"

using namespace lobc;
using Catch::Approx;

namespace {

ProblemSpec make_spec(PucciParams P, double p, double C, BoundaryMode mode = BoundaryMode::generalized) {
    ProblemSpec s;
    s.params = P;
    s.hamiltonian = Hamiltonian::power_law(p);
    s.u0 = InitialData::cutoff(C);
    s.boundary_mode = mode;
    return s;
}

Field random_state(std::mt19937_64& rng, const RadialGrid& g, double amp) {
    std::uniform_real_distribution<double> U(0.0, amp);
    std::vector<double> v(g.N);
    for (double& x : v) x = U(rng);
    return Field(g, v);
}

}  // namespace

TEST_CASE("cfl_dt examples", "[solver]") {
    SchemeConfig cfg;
    ProblemSpec spec = make_spec({1.0, 1.0, 1}, 2.0, 1.0);
    const RadialGrid g = make_grid(0.0, 1.0, 101);
    REQUIRE(cfl_dt(Field::zeros(g), spec, cfg) == Approx(2.5e-5).epsilon(1e-12));

    spec.hamiltonian = Hamiltonian::power_law(3.0);
    std::vector<double> v(g.N, 0.0);
    v[1] = 10.0 * g.h;  // one slope of 10
    const Field s(g, v);
    REQUIRE(spec.hamiltonian.derivative(max_slope(s)) == Approx(300.0).epsilon(1e-12));
    REQUIRE(cfl_dt(s, spec, cfg) == Approx(0.5 / (2.0 / (g.h * g.h) + 300.0 / g.h)).epsilon(1e-12));

    double prev = 1e300;
    for (double m : {0.0, 1.0, 5.0, 50.0}) {
        v[1] = m * g.h;
        const double dt = cfl_dt(Field(g, v), spec, cfg);
        REQUIRE(dt < prev);
        prev = dt;
    }
}

TEST_CASE("Godunov flux cases", "[solver]") {
    const Hamiltonian H = Hamiltonian::power_law(2.0);
    REQUIRE(detail::godunov(-1.0, 3.0, H) == 9.0);
    REQUIRE(detail::godunov(2.0, -1.0, H) == 0.0);
    REQUIRE(detail::godunov(3.0, 1.0, H) == 1.0);
    REQUIRE(detail::godunov(-1.0, -3.0, H) == 1.0);
    REQUIRE(detail::godunov(0.0, 0.0, H) == 0.0);
}

TEST_CASE("boundary flux is monotone in the inward quotient", "[solver][property]") {
    std::mt19937_64 rng(oracle::seed());
    std::uniform_real_distribution<double> S(-50.0, 50.0), L(0.2, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double lo = L(rng);
        const PucciParams P{lo, lo + L(rng), 1 + trial % 4};
        const Hamiltonian H = Hamiltonian::power_law(1.5 + 0.25 * (trial % 8));
        const double h = 0.01;
        double a = S(rng), b = S(rng);
        if (a > b) std::swap(a, b);
        const double fa = detail::boundary_flux(a, h, P.n - 1.0, P, H);
        const double fb = detail::boundary_flux(b, h, P.n - 1.0, P, H);
        REQUIRE(fa <= fb);
        // the slope never exceeds the bound used by the time step
        REQUIRE(fb - fa <= (2.0 * P.Lambda / h + H.derivative(std::max(std::abs(a), std::abs(b)))) * (b - a) * (1.0 + 1e-9));
    }
}

TEST_CASE("zero is a steady state", "[solver]") {
    for (BoundaryMode m : {BoundaryMode::generalized, BoundaryMode::classical}) {
        const ProblemSpec spec = make_spec({0.5, 2.0, 3}, 3.0, 0.0, m);
        const RadialGrid g = make_grid(0.0, 1.0, 101);
        Field u = Field::zeros(g);
        SchemeConfig cfg;
        for (int k = 0; k < 10; ++k) u = step(u, cfl_dt(u, spec, cfg), spec, cfg);
        for (double x : u.values) REQUIRE(x == 0.0);
    }
}

TEST_CASE("step preserves order", "[solver][property]") {
    std::mt19937_64 rng(oracle::seed() + 1);
    std::uniform_real_distribution<double> U(0.0, 1.0), L(0.2, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double lo = L(rng);
        ProblemSpec spec = make_spec({lo, lo + L(rng), 1 + trial % 4}, 1.5 + 0.5 * (trial % 4), 1.0,
                                     trial % 2 ? BoundaryMode::generalized : BoundaryMode::classical);
        const RadialGrid g = make_grid(0.0, 1.0, 21 + trial % 40);
        const Field u = random_state(rng, g, 2.0);
        std::vector<double> v = u.values;
        for (double& x : v)
            if (U(rng) < 0.7) x += U(rng);
        const Field w(g, v);
        SchemeConfig cfg;
        const double dt = std::min(cfl_dt(u, spec, cfg), cfl_dt(w, spec, cfg));
        const Field a = step(u, dt, spec, cfg), b = step(w, dt, spec, cfg);
        for (std::size_t j = 0; j < g.N; ++j) REQUIRE(a[j] <= b[j]);
    }
}

TEST_CASE("trajectories stay within the data bounds", "[solver][property]") {
    std::mt19937_64 rng(oracle::seed() + 2);
    std::uniform_real_distribution<double> A(0.0, 4.0), L(0.3, 2.0);
    for (int trial = 0; trial < 12; ++trial) {
        const double lo = L(rng);
        ProblemSpec spec = make_spec({lo, lo + L(rng), 1 + trial % 3}, 2.0 + 0.5 * (trial % 3), A(rng),
                                     trial % 2 ? BoundaryMode::generalized : BoundaryMode::classical);
        if (trial % 4 == 3) spec.u0 = InitialData::cone(A(rng));
        SchemeConfig cfg;
        cfg.t_max = 0.01;
        cfg.snapshot_stride = 1;
        const Trajectory tr = evolve(spec, make_grid(0.0, 1.0, 81), cfg);
        for (const Field& s : tr.snapshots)
            for (double x : s.values) {
                REQUIRE(x >= 0.0);
                REQUIRE(x <= tr.max_u0 + 1e-12);
            }
        for (const SeriesRecord& r : tr.series) REQUIRE(r.max_u <= tr.max_u0 + 1e-12);
    }
}

TEST_CASE("generalized boundary complementarity", "[solver][property]") {
    for (double C : {0.5, 2.0, 3.0}) {
        SchemeConfig cfg;
        cfg.t_max = 0.005;
        const Trajectory tr = evolve(make_spec({1.0, 1.0, 2}, 3.0, C), make_grid(0.0, 1.0, 201), cfg);
        bool lifted = false;
        for (const SeriesRecord& r : tr.series) {
            REQUIRE(r.u_boundary >= r.u_tilde);
            REQUIRE(std::min(r.u_boundary, r.u_boundary - r.u_tilde) == 0.0);
            lifted = lifted || r.u_boundary > 0.0;
        }
        if (C >= 2.0) REQUIRE(lifted);
    }
    SchemeConfig cfg;
    cfg.t_max = 0.005;
    const Trajectory tr =
        evolve(make_spec({1.0, 1.0, 2}, 3.0, 3.0, BoundaryMode::classical), make_grid(0.0, 1.0, 201), cfg);
    for (const SeriesRecord& r : tr.series) REQUIRE(r.u_boundary == 0.0);
}

TEST_CASE("one step is consistent on quadratics", "[solver][oracle]") {
    // u = c r^2: u'' = 2c, u' = 2cr, so the exact rate is
    // theta(2c) 2c + (n-1) theta(2cr) 2c + |2cr|^p
    for (int n : {1, 2, 3}) {
        for (double c : {1.0, -1.0}) {
            const PucciParams P{0.5, 2.0, n};
            const ProblemSpec spec = make_spec(P, 3.0, 1.0);
            std::vector<double> errs;
            for (std::size_t N : {101u, 201u, 401u, 801u}) {
                const RadialGrid g = make_grid(0.0, 1.0, N);
                std::vector<double> v(N);
                for (std::size_t j = 0; j < N; ++j) v[j] = 2.0 + c * g.node(j) * g.node(j);
                const Field u(g, v);
                const double dt = 0.5 * cfl_dt(u, spec, SchemeConfig{});
                const Field w = step(u, dt, spec, SchemeConfig{});
                double err = 0.0;
                for (std::size_t j = 0; j < N; ++j) {
                    const double r = g.node(j);
                    if (r < 0.25 || r > 0.9) continue;
                    const double exact = theta(2 * c, P) * 2 * c + (n - 1) * theta(2 * c * r, P) * 2 * c +
                                         std::pow(std::abs(2 * c * r), 3.0);
                    err = std::max(err, std::abs((w[j] - u[j]) / dt - exact));
                }
                errs.push_back(err);
            }
            for (std::size_t i = 1; i < errs.size(); ++i) {
                const double order = std::log2(errs[i - 1] / errs[i]);
                REQUIRE(order >= 0.9);
            }
        }
    }
}

TEST_CASE("linear diffusion matches an independent reference", "[solver][oracle]") {
    const double p = 2.0, t_end = 0.01;
    std::vector<double> errs, hs;
    for (std::size_t N : {51u, 101u, 201u}) {
        ProblemSpec spec = make_spec({1.0, 1.0, 2}, p, 1.0, BoundaryMode::classical);
        const RadialGrid g = make_grid(0.0, 1.0, N);
        SchemeConfig cfg;
        cfg.t_max = t_end;
        const Trajectory tr = evolve(spec, g, cfg);
        const Field u0 = sample_initial_data(spec, g);
        const auto ref = oracle::radial_heat_reference(u0.values, g.h, 2, p, t_end, 0.1 * g.h * g.h);
        const Field& fin = tr.snapshots.back();
        REQUIRE(fin.time == t_end);
        double err = 0.0;
        for (std::size_t j = 0; j < N; ++j) err = std::max(err, std::abs(fin[j] - ref[j]));
        errs.push_back(err);
        hs.push_back(g.h);
    }
    for (std::size_t i = 0; i < errs.size(); ++i) REQUIRE(errs[i] <= 5.0 * hs[i]);
    REQUIRE(errs[2] < errs[1]);
    REQUIRE(errs[1] < errs[0]);
}

TEST_CASE("general and power-law Hamiltonians step alike", "[solver]") {
    ProblemSpec a = make_spec({1.0, 2.0, 2}, 3.0, 2.0);
    ProblemSpec b = a;
    b.hamiltonian = Hamiltonian::general([](double s) { return s * s * s; }, [](double s) { return 3.0 * s * s; });
    const RadialGrid g = make_grid(0.0, 1.0, 101);
    Field u = sample_initial_data(a, g), v = u;
    SchemeConfig cfg;
    for (int k = 0; k < 200; ++k) {
        const double dt = cfl_dt(u, a, cfg);
        u = step(u, dt, a, cfg);
        v = step(v, dt, b, cfg);
    }
    for (std::size_t j = 0; j < g.N; ++j) REQUIRE(u[j] == Approx(v[j]).margin(1e-9));
}

TEST_CASE("step rejects bad input", "[solver]") {
    const ProblemSpec spec = make_spec({1.0, 1.0, 2}, 3.0, 1.0);
    const RadialGrid g = make_grid(0.0, 1.0, 51);
    const Field u = sample_initial_data(spec, g);
    SchemeConfig cfg;
    const double dt = cfl_dt(u, spec, cfg);
    REQUIRE_NOTHROW(step(u, dt, spec, cfg));
    REQUIRE_THROWS_AS(step(u, 2.0 * dt, spec, cfg), InvalidArgument);
    REQUIRE_THROWS_AS(step(u, 0.0, spec, cfg), InvalidArgument);
    REQUIRE_THROWS_AS(step(Field::zeros(make_grid(0.1, 1.0, 51)), dt, spec, cfg), InvalidArgument);
    std::vector<double> bad = u.values;
    bad[4] = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(step(Field(g, bad), dt, spec, cfg), InvalidArgument);
    cfg.cfl_safety = 1.5;
    REQUIRE_THROWS_AS(evolve(spec, g, cfg), InvalidArgument);
}

TEST_CASE("small data keeps the boundary condition", "[solver][evolve]") {
    SchemeConfig cfg;
    cfg.t_max = 1.0;
    cfg.series_stride = 200;
    const ProblemSpec spec = make_spec({1.0, 1.0, 2}, 3.0, 0.01);
    const Trajectory tr = evolve(spec, make_grid(0.0, 1.0, 201), cfg);
    REQUIRE(tr.stop == StopReason::t_max);
    REQUIRE(tr.series.back().t == 1.0);
    const double s0 = tr.series.front().max_slope;
    for (const SeriesRecord& r : tr.series) {
        REQUIRE(r.u_boundary == 0.0);
        REQUIRE(r.max_slope <= s0 * (1.0 + 1e-12));
    }
}

TEST_CASE("large data loses the boundary condition or blows up", "[solver][evolve]") {
    SchemeConfig cfg;
    cfg.t_max = 0.05;
    cfg.lobc_latch = 1e-3;
    const Trajectory lobc = evolve(make_spec({1.0, 1.0, 2}, 3.0, 2.0), make_grid(0.0, 1.0, 401), cfg);
    REQUIRE(lobc.stop == StopReason::lobc_latch);
    REQUIRE(lobc.series.back().u_boundary > 1e-3);
    REQUIRE(lobc.series.back().t < 0.05);

    SchemeConfig gc;
    gc.t_max = 0.05;
    gc.grad_cap = 100.0;
    const Trajectory gbu =
        evolve(make_spec({1.0, 1.0, 2}, 3.0, 2.0, BoundaryMode::classical), make_grid(0.0, 1.0, 401), gc);
    REQUIRE(gbu.stop == StopReason::gbu);
    REQUIRE(gbu.series.back().max_slope >= 100.0);
    REQUIRE(gbu.grad_cap == 100.0);
}

TEST_CASE("trajectory bookkeeping", "[solver][evolve]") {
    SchemeConfig cfg;
    cfg.t_max = 0.01;
    cfg.snapshot_stride = 50;
    cfg.series_stride = 7;
    const ProblemSpec spec = make_spec({1.0, 2.0, 2}, 2.0, 1.0);
    const Trajectory tr = evolve(spec, make_grid(0.0, 1.0, 101), cfg);
    REQUIRE(tr.snapshots.front().time == 0.0);
    REQUIRE(tr.snapshots.back().time == 0.01);
    REQUIRE(tr.snapshots.size() == 2 + (tr.steps - 1) / 50);
    for (std::size_t i = 1; i < tr.snapshots.size(); ++i) REQUIRE(tr.snapshots[i].time > tr.snapshots[i - 1].time);
    for (std::size_t i = 1; i < tr.series.size(); ++i) REQUIRE(tr.series[i].t > tr.series[i - 1].t);
    REQUIRE(tr.grad_cap == Approx(1e4 * (tr.series.front().max_slope + 1.0)));

    cfg.max_steps = 10;
    const Trajectory cut = evolve(spec, make_grid(0.0, 1.0, 101), cfg);
    REQUIRE(cut.stop == StopReason::step_limit);
    REQUIRE(cut.steps == 10);
}
