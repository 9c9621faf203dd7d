#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "lobc/eigen.hpp"
#include "oracles.hpp"

using namespace lobc;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

Field constant(const RadialGrid& g, double c) { return Field(g, std::vector<double>(g.N, c)); }

/// min over the four coefficient pairs, written out directly.
double pucci_residual(const Field& phi, const Field& f, const PucciParams& P) {
    const RadialGrid& g = phi.grid;
    double res = 0.0;
    for (std::size_t j = 1; j + 1 < g.N; ++j) {
        const double r = g.node(j), h = g.h;
        const double d2 = (phi[j + 1] - 2.0 * phi[j] + phi[j - 1]) / (h * h);
        const double dp = (phi[j + 1] - phi[j]) / h;
        double best = 1e300;
        for (double a : {P.lambda, P.Lambda})
            for (double b : {P.lambda, P.Lambda}) best = std::min(best, a * d2 + b * (P.n - 1) / r * dp);
        res = std::max(res, std::abs(best + f[j]));
    }
    return res;
}

/// Dense matrix of -(D2 + (n-1)/r D+) on interior nodes.
Eigen::MatrixXd linear_operator(const RadialGrid& g, int n) {
    const int m = static_cast<int>(g.N) - 2;
    const double h = g.h;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        const double c = (n - 1) / g.node(static_cast<std::size_t>(i) + 1);
        A(i, i) = 2.0 / (h * h) + c / h;
        if (i > 0) A(i, i - 1) = -1.0 / (h * h);
        if (i + 1 < m) A(i, i + 1) = -1.0 / (h * h) - c / h;
    }
    return A;
}

}  // namespace

TEST_CASE("zero right-hand side gives zero", "[eigen][bvp]") {
    const RadialGrid g = make_grid(0.1, 0.9, 101);
    const Field phi = solve_pucci_bvp(constant(g, 0.0), g, PucciParams{1.0, 3.0, 3}, 1e-12);
    for (double x : phi.values) REQUIRE(x == 0.0);
}

TEST_CASE("BVP closed forms in one dimension", "[eigen][bvp][oracle]") {
    const RadialGrid g = make_grid(0.0, 1.0, 201);
    // the second difference is exact on quadratics
    const Field a = solve_pucci_bvp(constant(g, 1.0), g, PucciParams{1.0, 1.0, 1}, 1e-9);
    const Field b = solve_pucci_bvp(constant(g, 1.0), g, PucciParams{1.0, 2.0, 1}, 1e-9);
    for (std::size_t j = 0; j < g.N; ++j) {
        const double r = g.node(j);
        REQUIRE(a[j] == Approx(r * (1.0 - r) / 2.0).margin(1e-12));
        REQUIRE(b[j] == Approx(r * (1.0 - r) / 4.0).margin(1e-12));
    }
    REQUIRE(a[100] == Approx(0.125).margin(1e-12));
    REQUIRE(b[100] == Approx(1.0 / 16.0).margin(1e-12));
}

TEST_CASE("linear BVP matches a dense solve", "[eigen][bvp][oracle]") {
    const RadialGrid g = make_grid(0.1, 0.9, 151);
    std::vector<double> fv(g.N);
    for (std::size_t j = 0; j < g.N; ++j) fv[j] = 1.0 + std::sin(5.0 * g.node(j));
    const Field f(g, fv);
    for (int n : {2, 3, 5}) {
        const Field phi = solve_pucci_bvp(f, g, PucciParams{1.0, 1.0, n}, 1e-9);
        const Eigen::MatrixXd A = linear_operator(g, n);
        Eigen::VectorXd rhs(g.N - 2);
        for (std::size_t j = 1; j + 1 < g.N; ++j) rhs(static_cast<int>(j) - 1) = fv[j];
        const Eigen::VectorXd x = A.partialPivLu().solve(rhs);
        for (std::size_t j = 1; j + 1 < g.N; ++j) REQUIRE(phi[j] == Approx(x(static_cast<int>(j) - 1)).epsilon(1e-10));
    }
}

TEST_CASE("policy iteration solves the nonlinear BVP", "[eigen][bvp][property]") {
    std::mt19937_64 rng(oracle::seed());
    std::uniform_real_distribution<double> U(-2.0, 2.0), L(0.2, 2.0);
    for (int trial = 0; trial < 40; ++trial) {
        const double lo = L(rng);
        const PucciParams P{lo, lo + L(rng), 1 + trial % 4};
        const double eps = 0.02 + 0.2 * std::abs(U(rng)) / 2.0;
        const RadialGrid g = make_grid(eps, 1.0 - eps, 101 + trial);
        std::vector<double> fv(g.N);
        const double c1 = U(rng), c2 = U(rng), c3 = U(rng);
        for (std::size_t j = 0; j < g.N; ++j) fv[j] = c1 + c2 * std::sin(7.0 * g.node(j)) + c3 * g.node(j);
        const Field f(g, fv);
        const BvpResult res = solve_pucci_bvp_ex(f, g, P, 1e-10);
        REQUIRE(res.iterations <= 30);
        REQUIRE(res.phi[0] == 0.0);
        REQUIRE(res.phi.values.back() == 0.0);
        double fs = 1.0;
        for (double x : fv) fs = std::max(fs, std::abs(x));
        REQUIRE(pucci_residual(res.phi, f, P) <= 1e-10 * fs);
        UNSCOPED_INFO("policy iterations: " << res.iterations);
    }
}

TEST_CASE("BVP errors", "[eigen][bvp]") {
    const RadialGrid g = make_grid(0.1, 0.9, 101);
    const PucciParams P{1.0, 2.0, 2};
    REQUIRE_THROWS_AS(solve_pucci_bvp_ex(constant(g, 1.0), g, P, 1e-12, 1), ConvergenceError);
    try {
        solve_pucci_bvp_ex(constant(g, 1.0), g, P, 1e-12, 1);
    } catch (const ConvergenceError& e) {
        REQUIRE(e.last_residual() > 0.0);
    }
    std::vector<double> bad(g.N, 1.0);
    bad[3] = std::nan("");
    REQUIRE_THROWS_AS(solve_pucci_bvp(Field(g, bad), g, P, 1e-12), InvalidArgument);
    REQUIRE_THROWS_AS(solve_pucci_bvp(constant(make_grid(0.1, 0.9, 51), 1.0), g, P, 1e-12), InvalidArgument);
    std::vector<double> z(3, 0.0);
    REQUIRE_THROWS_AS(thomas_solve({0, 1, 1}, {0, 1, 1}, {1, 1, 0}, z), NumericalError);
}

TEST_CASE("principal eigenvalue of the Laplacian", "[eigen][oracle]") {
    const std::size_t N = 401;
    const EigenPair e = principal_eigenpair(0.0, PucciParams{1.0, 1.0, 1}, N, 1e-11);
    const double h = 1.0 / (N - 1);
    const double dense = oracle::dirichlet_laplacian_min_eig(static_cast<int>(N) - 2, h);
    REQUIRE(e.lambda1 == Approx(dense).epsilon(1e-9));
    REQUIRE(std::abs(e.lambda1 - pi * pi) <= pi * pi * pi * pi * h * h / 12.0 * 1.01);
    REQUIRE(std::abs(e.lambda1 - pi * pi) <= 0.005 * pi * pi);
    for (std::size_t j = 0; j < N; ++j) REQUIRE(e.phi[j] == Approx(std::sin(pi * e.phi.grid.node(j))).margin(2.0 * h * h));
}

TEST_CASE("concave eigenfunction picks the larger coefficient", "[eigen][oracle]") {
    const std::size_t N = 401;
    const EigenPair e = principal_eigenpair(0.0, PucciParams{1.0, 2.0, 1}, N, 1e-11);
    const double dense = oracle::dirichlet_laplacian_min_eig(static_cast<int>(N) - 2, 1.0 / (N - 1));
    REQUIRE(e.lambda1 == Approx(2.0 * dense).epsilon(1e-9));
    REQUIRE(std::abs(e.lambda1 - 2.0 * pi * pi) <= 0.005 * 2.0 * pi * pi);
}

TEST_CASE("linear radial eigenvalue matches the dense spectrum", "[eigen][oracle]") {
    for (int n : {2, 3}) {
        const EigenPair e = principal_eigenpair(0.1, PucciParams{1.0, 1.0, n}, 201, 1e-11);
        Eigen::EigenSolver<Eigen::MatrixXd> es(linear_operator(e.phi.grid, n), false);
        double smallest = 1e300;
        for (int i = 0; i < es.eigenvalues().size(); ++i) smallest = std::min(smallest, es.eigenvalues()(i).real());
        REQUIRE(e.lambda1 == Approx(smallest).epsilon(1e-8));
        REQUIRE(e.residual <= 1e-8);
    }
}

TEST_CASE("eigenpair invariants", "[eigen][property]") {
    std::mt19937_64 rng(oracle::seed() + 1);
    std::uniform_real_distribution<double> L(0.3, 2.0);
    const double beta = 8.0;
    const double hopf = beta * std::exp(-beta / 4.0) / (1.0 - std::exp(-beta / 4.0));
    for (int trial = 0; trial < 12; ++trial) {
        const double lo = L(rng);
        const PucciParams P{lo, lo + L(rng), 1 + trial % 4};
        const double eps = 0.025 * (1 + trial % 8);
        const EigenPair e = principal_eigenpair(eps, P, 201, 1e-10);
        const std::size_t N = e.phi.size();
        REQUIRE(e.phi[0] == 0.0);
        REQUIRE(e.phi[N - 1] == 0.0);
        for (std::size_t j = 1; j + 1 < N; ++j) REQUIRE(e.phi[j] > 0.0);
        REQUIRE(e.phi[node_nearest(e.phi.grid, 0.5)] == 1.0);
        REQUIRE(e.lambda1 > 0.0);
        REQUIRE(e.lambda_lower <= e.lambda1);
        REQUIRE(e.residual <= 1e-8);
        // one-sided slope at the inner boundary
        REQUIRE(e.phi[1] / e.phi.grid.h >= hopf);

        const EigenPair big = principal_eigenpair(eps, P, 201, 1e-10, 500, 1e3);
        const EigenPair tiny = principal_eigenpair(eps, P, 201, 1e-10, 500, 1e-3);
        REQUIRE(big.lambda1 == Approx(e.lambda1).epsilon(1e-9));
        REQUIRE(tiny.lambda1 == Approx(e.lambda1).epsilon(1e-9));
        for (std::size_t j = 0; j < N; ++j) REQUIRE(big.phi[j] == Approx(e.phi[j]).margin(1e-7));
    }
}

TEST_CASE("eigenvalue is monotone in the annulus", "[eigen][property]") {
    const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
    for (const PucciParams& P : {PucciParams{1.0, 1.0, 1}, PucciParams{1.0, 2.0, 2}, PucciParams{0.5, 3.0, 3},
                                 PucciParams{1.0, 4.0, 5}}) {
        double prev = 1e300;
        for (double e : eps) {
            const double l = principal_eigenpair(e, P, 401, 1e-10).lambda1;
            REQUIRE(l <= prev);
            prev = l;
        }
    }
}

TEST_CASE("eigen preconditions", "[eigen]") {
    const PucciParams P{1.0, 2.0, 2};
    REQUIRE_THROWS_AS(principal_eigenpair(0.25, P, 101, 1e-8), InvalidArgument);
    REQUIRE_THROWS_AS(principal_eigenpair(-0.1, P, 101, 1e-8), InvalidArgument);
    REQUIRE_THROWS_AS(principal_eigenpair(0.1, P, 50, 1e-8), InvalidArgument);
    REQUIRE_THROWS_AS(principal_eigenpair(0.1, P, 101, 0.0), InvalidArgument);
    REQUIRE_THROWS_AS(principal_eigenpair(0.1, P, 101, 1e-14, 3), ConvergenceError);
}

TEST_CASE("integrability quadrature", "[eigen][integrability]") {
    const RadialGrid g = make_grid(0.0, 1.0, 101);
    EigenPair flat;
    flat.phi = constant(g, 1.0);
    const double lam = 2.5;
    REQUIRE(eigen_integrability_check(flat, 0.5, constant(g, 1.0 / lam)) == Approx(1.0 / lam).epsilon(1e-14));
    REQUIRE_THROWS_AS(eigen_integrability_check(flat, 0.0, constant(g, 1.0)), InvalidArgument);
    REQUIRE_THROWS_AS(eigen_integrability_check(flat, 1.0, constant(g, 1.0)), InvalidArgument);

    // sin(pi r)^(-alpha) on (0, 1) integrates to Gamma((1-alpha)/2) / (sqrt(pi) Gamma(1 - alpha/2))
    for (double alpha : {0.25, 0.5, 0.75}) {
        const double exact = std::tgamma(0.5 * (1.0 - alpha)) / (std::sqrt(pi) * std::tgamma(1.0 - 0.5 * alpha));
        double prev_err = 1e300;
        for (std::size_t N : {401u, 1601u, 6401u}) {
            const RadialGrid s = make_grid(0.0, 1.0, N);
            std::vector<double> v(N);
            for (std::size_t j = 0; j < N; ++j) v[j] = std::sin(pi * s.node(j));
            v[0] = v[N - 1] = 0.0;
            EigenPair pair;
            pair.phi = Field(s, v);
            const double err = std::abs(eigen_integrability_check(pair, alpha, constant(s, 1.0)) - exact);
            REQUIRE(err < prev_err);
            prev_err = err;
        }
        REQUIRE(prev_err <= 0.01 * exact);
    }
}

TEST_CASE("integrability is uniform in eps", "[eigen][integrability]") {
    const PucciParams P{1.0, 2.0, 2};
    const double alpha = 0.5;  // 1/(p-1) with p = 3
    std::vector<double> vals;
    for (double e : {0.2, 0.1, 0.05, 0.025}) {
        const EigenPair pair = principal_eigenpair(e, P, 801, 1e-10);
        const double v = eigen_integrability_check(pair, alpha, constant(pair.phi.grid, 1.0 / P.lambda));
        REQUIRE(std::isfinite(v));
        vals.push_back(v);
    }
    for (double v : vals) REQUIRE(v <= 2.0 * vals.front());
    REQUIRE(std::abs(vals[3] - vals[2]) < 0.1 * vals[2]);
    for (std::size_t i = 0; i < vals.size(); ++i) UNSCOPED_INFO("eps index " << i << ": " << vals[i]);
}
