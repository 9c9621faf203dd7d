#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lobc/analysis.hpp"
#include "lobc/config.hpp"
#include "lobc/eigen.hpp"
#include "lobc/pucci.hpp"
#include "lobc/regularize.hpp"

namespace lobc::checks {

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline SymMatrix random_symmetric(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    SymMatrix X(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) X(i, j) = U(rng);
    return X;
}

/// min over the 2^n diagonal coefficient choices in the eigenbasis of X of tr(A X).
inline double pucci_minus_enumerated(const SymMatrix& X, const PucciParams& P) {
    const int n = X.order();
    const EigenDecomposition ed = jacobi_eigen(X);
    const std::vector<double> D = X.dense();
    double best = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < (1 << n); ++mask) {
        double tr = 0.0;
        for (int k = 0; k < n; ++k) {
            const double a = (mask >> k) & 1 ? P.Lambda : P.lambda;
            // q_k^T X q_k
            double quad = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    quad += ed.vectors[static_cast<std::size_t>(i * n + k)] * D[static_cast<std::size_t>(i * n + j)] *
                            ed.vectors[static_cast<std::size_t>(j * n + k)];
            tr += a * quad;
        }
        best = std::min(best, tr);
    }
    return best;
}

}  // namespace detail

inline SuiteResult suite_pucci(std::uint64_t seed, int matrices) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> L(0.1, 3.0);
    double worst = 0.0, worst_radial = 0.0;
    for (int t = 0; t < matrices; ++t) {
        const int n = 1 + t % 5;
        const double lo = L(rng);
        const PucciParams P{lo, lo + L(rng), n};
        const SymMatrix X = detail::random_symmetric(rng, n);
        const double ref = detail::pucci_minus_enumerated(X, P);
        worst = std::max(worst, std::abs(pucci_minus(X, P) - ref) / std::max(1.0, std::abs(ref)));
        std::uniform_real_distribution<double> U(-5.0, 5.0), R(0.01, 2.0);
        const double upp = U(rng), up = U(rng), r = R(rng);
        std::vector<double> d(static_cast<std::size_t>(n), up / r);
        d[0] = upp;
        const double m = pucci_minus(SymMatrix::diag(d), P);
        worst_radial = std::max(worst_radial, std::abs(pucci_minus_radial(upp, up, r, P) - m) / std::max(1.0, std::abs(m)));
    }
    std::ostringstream os;
    os << matrices << " matrices; max relative error " << worst << "; radial " << worst_radial;
    return {"pucci", worst <= 1e-10 && worst_radial <= 1e-10, os.str()};
}

inline SuiteResult suite_convolution(std::uint64_t seed) {
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> U(-2.0, 2.0), E(0.01, 0.3);
    bool ok = true;
    double semigroup = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t N = 25, T = 4;
        std::vector<double> t(T), v(N * T);
        for (std::size_t k = 0; k < T; ++k) t[k] = 0.05 * static_cast<double>(k);
        for (double& x : v) x = U(rng);
        const SpaceTimeField u(make_grid(0.0, 1.0, N), t, v);
        const double eps = E(rng), delta = std::min(E(rng), eps * eps), kappa = E(rng);
        const SpaceTimeField ue = inf_convolution(u, eps, kappa, ConvMethod::brute);
        const SpaceTimeField w = lasry_lions_w(u, eps, delta, kappa, 2.0, ConvMethod::brute);
        ok = ok && ue.min_value() >= u.min_value() && ue.max_value() <= u.max_value();
        ok = ok && w.min_value() >= u.min_value() && w.max_value() <= u.max_value();
        const SpaceTimeField lhs = sup_convolution(inf_convolution(u, eps + delta, kappa), delta);
        for (std::size_t i = 0; i < lhs.values.size(); ++i) ok = ok && lhs.values[i] <= ue.values[i];
        const SpaceTimeField target = inf_convolution(u, eps + delta, kappa, ConvMethod::brute);
        const std::vector<double> r = u.grid.nodes();
        for (std::size_t k = 0; k < T; ++k)
            for (std::size_t i = 0; i < N; ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < N; ++j) {
                    const double z = (delta * r[j] + eps * r[i]) / (eps + delta);
                    best = std::min(best, inf_convolution_at(u, eps, kappa, z, k) + (r[i] - z) * (r[i] - z) / (2.0 * delta));
                }
                semigroup = std::max(semigroup, std::abs(best - target.at(k, i)));
            }
    }
    std::ostringstream os;
    os << "bounds and ordering " << (ok ? "hold" : "violated") << "; semigroup max error " << semigroup;
    return {"convolution", ok && semigroup <= 1e-12, os.str()};
}

inline SuiteResult suite_poincare(std::uint64_t seed) {
    std::mt19937_64 rng(seed + 2);
    std::uniform_real_distribution<double> U(-1.0, 1.0), K(0.0, 5.0);
    int violations = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const RadialGrid g = make_grid(0.0, 1.0, 201);
        std::vector<double> knots(6);
        for (double& x : knots) x = U(rng);
        knots.back() = 0.0;
        const double k = K(rng);
        std::vector<double> v(g.N), rho(g.N);
        for (std::size_t j = 0; j < g.N; ++j) {
            const double r = g.node(j), s = r * 5.0;
            const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(s), 4);
            v[j] = knots[i] + (s - static_cast<double>(i)) * (knots[i + 1] - knots[i]);
            rho[j] = std::pow(r + 0.05, k);
        }
        v.back() = 0.0;
        const PoincareReport rep = weighted_poincare(Field(g, v), Field(g, rho));
        if (rep.lhs > rep.rhs + g.h || rep.constant > 1.0 + 1e-12) ++violations;
    }
    const RadialGrid d = make_grid(0.0, 1.0, 1025);
    const double one = sharp_poincare_constant(Field(d, std::vector<double>(d.N, 1.0)));
    std::ostringstream os;
    os << violations << " violations in 100 trials; constant for nu = 1 is " << one;
    return {"poincare", violations == 0 && one == 1.0, os.str()};
}

inline SuiteResult suite_barrier(const CheckSection& cfg) {
    bool ok = true;
    std::ostringstream os;
    int cases = 0;
    for (double p : {2.5, 3.0, 4.0})
        for (double Lam : {1.0, 2.0})
            for (int n : {1, 2, 3}) {
                const PucciParams P{1.0, Lam, n};
                BarrierSet b = barrier_constants(P, p, 1.0, 1.0);
                if (cfg.barrier_mu) {
                    b.mu = *cfg.barrier_mu;
                    b.eta = b.mu;
                }
                if (!b.feasible) {
                    ok = false;
                    os << "infeasible at p=" << p << " Lambda=" << Lam << " n=" << n << "; ";
                    continue;
                }
                const BarrierReport rep = verify_barrier(b, P, p, cfg.barrier_samples);
                ++cases;
                if (!rep.ok) {
                    ok = false;
                    os << "margin " << std::min(rep.min_margin_step1, rep.min_margin_step2) << " at s=" << rep.worst_s
                       << " for p=" << p << " Lambda=" << Lam << " n=" << n << "; ";
                }
            }
    os << cases << " parameter sets verified" << (cfg.barrier_mu ? " with overridden mu" : "");
    return {"barrier", ok, os.str()};
}

inline SuiteResult suite_growth(const CheckSection& cfg) {
    std::function<double(double)> h;
    bool expect_convergent = false;
    if (cfg.growth_h == "logsq") {
        h = [](double s) { return std::pow(std::log(std::max(s, 1.0)), 2.0); };
        expect_convergent = true;
    } else if (cfg.growth_h == "log") {
        h = [](double s) { return std::log(std::max(s, 1.0)); };
    } else {
        h = [](double) { return 1.0; };
    }
    const GrowthReport rep = growth_diagnostics(h, cfg.s_max);
    std::ostringstream os;
    os << "h = " << cfg.growth_h << ": fitted exponent " << rep.decay_exponent_h << ", verdict "
       << (rep.convergent_h ? "convergent" : "divergent");
    return {"growth", rep.convergent_h == expect_convergent && rep.convergent_h1 == expect_convergent, os.str()};
}

inline SuiteResult suite_eigen() {
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double l1 = principal_eigenpair(0.0, PucciParams{1.0, 1.0, 1}, 401, 1e-10).lambda1;
    const double l2 = principal_eigenpair(0.0, PucciParams{1.0, 2.0, 1}, 401, 1e-10).lambda1;
    bool mono = true;
    double prev = std::numeric_limits<double>::infinity();
    for (double e : {0.2, 0.1, 0.05, 0.025}) {
        const double l = principal_eigenpair(e, PucciParams{1.0, 2.0, 2}, 401, 1e-10).lambda1;
        mono = mono && l <= prev;
        prev = l;
    }
    std::ostringstream os;
    os << "lambda1 = " << l1 << " and " << l2 << "; monotone in eps: " << (mono ? "yes" : "no");
    return {"eigen", std::abs(l1 - pi2) <= 0.005 * pi2 && std::abs(l2 - 2.0 * pi2) <= 0.01 * pi2 && mono, os.str()};
}

inline SuiteResult suite_ode() {
    const OdeResult r = integrate_blowup_ode(2.0, 1.0, 2.0, 0.0, 0.0, 1e-3, 2.0);
    const double M0 = blowup_threshold_M0(2.0, 3.0, 0.0, 0.5);
    const OdeResult hi = integrate_blowup_ode(1.01 * M0, 2.0, 3.0, 0.0, 0.0, 5e-4, 0.5);
    const OdeResult lo = integrate_blowup_ode(0.5 * M0, 2.0, 3.0, 0.0, 0.0, 5e-4, 0.5);
    const bool ok = r.blowup_time && std::abs(*r.blowup_time - 0.5) <= 0.005 && hi.blowup_time && !lo.blowup_time;
    std::ostringstream os;
    os << "blow-up time " << (r.blowup_time ? *r.blowup_time : -1.0) << " (closed form 0.5)";
    return {"ode", ok, os.str()};
}

inline SuiteResult suite_weights(std::uint64_t seed) {
    std::mt19937_64 rng(seed + 3);
    std::uniform_real_distribution<double> U(-1.0, 1.0), L(0.2, 3.0), E(0.01, 0.24);
    int bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const double lo = L(rng);
        const PucciParams P{lo, lo + L(rng), 1 + trial % 5};
        const double eps = E(rng);
        const RadialGrid g = make_grid(eps, 1.0 - eps, 101);
        SignFields s;
        for (std::size_t j = 0; j < g.N; ++j) {
            s.slope.push_back(U(rng));
            s.curvature.push_back(U(rng));
        }
        const WeightPair w = divergence_weights(g, s, eps, P);
        if (w.rho.values.back() != 1.0) ++bad;
        for (std::size_t j = 0; j < g.N; ++j)
            if (!(w.rho_hat[j] <= w.rho_tilde[j]) || !(w.rho_tilde[j] <= 1.0 / P.lambda)) ++bad;
    }
    return {"weights", bad == 0, std::to_string(bad) + " violations in 200 sign fields"};
}

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"pucci", "convolution", "poincare", "barrier", "growth", "eigen", "ode", "weights"};
    return names;
}

inline SuiteResult run_suite(const std::string& name, const CheckSection& cfg, std::uint64_t seed) {
    if (name == "pucci") return suite_pucci(seed, cfg.matrices);
    if (name == "convolution") return suite_convolution(seed);
    if (name == "poincare") return suite_poincare(seed);
    if (name == "barrier") return suite_barrier(cfg);
    if (name == "growth") return suite_growth(cfg);
    if (name == "eigen") return suite_eigen();
    if (name == "ode") return suite_ode();
    if (name == "weights") return suite_weights(seed);
    throw ConfigError("unknown check suite '" + name + "'");
}

}  // namespace lobc::checks
