#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lobc/analysis.hpp"
#include "lobc/checks.hpp"
#include "lobc/config.hpp"
#include "lobc/eigen.hpp"
#include "lobc/io.hpp"
#include "lobc/solver.hpp"

namespace lobc::cli {

enum ExitCode : int {
    ok = 0,
    check_failed = 1,
    config_error = 2,
    numerical_failure = 3,
    monotonicity_violation_exit = 4,
    invalid_bracket = 5,
};

struct CliOptions {
    int jobs = 1;
    std::optional<std::string> out;
};

inline std::uint64_t seed_from_env() {
    const char* s = std::getenv("LOBC_LAB_SEED");
    if (!s || !*s) return 42;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0') throw ConfigError("LOBC_LAB_SEED must be a nonnegative integer");
    return v;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first failure.
template <class F>
void parallel_for(std::size_t n, int jobs, F fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
}

/// Maps library exceptions onto exit codes.
template <class F>
int guarded(const char* what, F fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "lobc-lab " << what << ": config error: " << e.what() << "\n";
        return config_error;
    } catch (const InvalidArgument& e) {
        std::cerr << "lobc-lab " << what << ": invalid input: " << e.what() << "\n";
        return config_error;
    } catch (const ConvergenceError& e) {
        std::cerr << "lobc-lab " << what << ": no convergence: " << e.what() << " (last residual " << e.last_residual()
                  << ")\n";
        return numerical_failure;
    } catch (const std::exception& e) {
        std::cerr << "lobc-lab " << what << ": failure: " << e.what() << "\n";
        return numerical_failure;
    }
}

inline std::filesystem::path output_dir(const RunConfig& c, const CliOptions& o) {
    std::filesystem::path d = o.out ? *o.out : c.directory;
    std::filesystem::create_directories(d);
    return d;
}

inline std::string format_eps(double e) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", e);
    return buf;
}

inline io::Json params_echo(const RunConfig& c) {
    io::Json j;
    j["lambda"] = c.problem.params.lambda;
    j["Lambda"] = c.problem.params.Lambda;
    j["n"] = c.problem.params.n;
    j["p"] = c.p;
    j["radius"] = c.problem.radius;
    j["family"] = c.problem.u0.family == InitialFamily::cone ? "cone" : "cutoff";
    j["amplitude"] = c.amplitude;
    j["boundary_mode"] = c.problem.boundary_mode == BoundaryMode::classical ? "classical" : "generalized";
    return j;
}

// ---------------------------------------------------------------- simulate

inline int simulate(const RunConfig& c, const CliOptions& o) {
    const RadialGrid grid = make_grid(0.0, c.problem.radius, c.N);
    std::optional<EigenPair> pair;
    ZProbe probe;
    std::optional<double> z_bound;
    if (c.z_probe) {
        if (c.problem.radius != 1.0) throw ConfigError("outputs.z_probe needs problem.radius = 1");
        pair = principal_eigenpair(c.eps, c.problem.params, c.eigen.N, c.eigen.tol);
        const WeightPair w = divergence_weights(pair->phi, c.eps, c.problem.params);
        probe = make_z_probe(*pair, w.rho_tilde);
    }
    const Trajectory tr = evolve(c.problem, grid, c.scheme, probe);
    const EventReport ev = detect_events(tr, c.lobc_tol, tr.grad_cap);
    if (pair) {
        const double max_phi = *std::max_element(pair->phi.values.begin(), pair->phi.values.end());
        z_bound = z_upper_bound(tr.max_u0, max_phi, c.problem.params, c.eps);
    }

    const std::filesystem::path dir = output_dir(c, o);
    if (c.write_csv) {
        std::vector<std::vector<io::Cell>> rows;
        rows.reserve(tr.series.size());
        for (const SeriesRecord& r : tr.series) rows.push_back({r.t, r.u_boundary, r.max_u, r.max_slope, r.z});
        io::write_csv(dir / "series.csv", {"t", "u_boundary", "max_u", "max_slope", "z"}, rows);
        std::vector<std::vector<io::Cell>> index;
        for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
            io::write_profile(dir / ("snap_" + std::to_string(k) + ".csv"), tr.snapshots[k], "u");
            index.push_back({static_cast<double>(k), tr.snapshots[k].time});
        }
        io::write_csv(dir / "snapshots.csv", {"k", "t"}, index);
    }

    if (c.write_json) {
        const SeriesRecord& last = tr.series.back();
        double max_boundary = 0.0;
        for (const SeriesRecord& r : tr.series) max_boundary = std::max(max_boundary, r.u_boundary);
        std::optional<double> fit_c, fit_slack;
        std::optional<bool> z_ok;
        if (pair) {
            std::vector<std::pair<double, double>> zs = ev.z_series;
            if (ev.gbu_time)
                zs.erase(std::remove_if(zs.begin(), zs.end(), [&](const auto& q) { return q.first > *ev.gbu_time; }),
                         zs.end());
            const ZInequalityFit fit = fit_z_inequality(zs, pair->lambda1, c.p);
            fit_c = fit.C;
            fit_slack = fit.worst_slack;
            z_ok = std::all_of(ev.z_series.begin(), ev.z_series.end(), [&](const auto& q) { return q.second <= *z_bound; });
        }
        const LargenessResult large = c.problem.radius == 1.0
                                          ? largeness_criterion(sample_initial_data(c.problem, grid), c.sweep.delta, 0.0)
                                          : LargenessResult{};

        io::Json s;
        s["command"] = "simulate";
        s["lobc_time"] = io::nullable(ev.lobc_time);
        s["gbu_time"] = io::nullable(ev.gbu_time);
        s["stop_reason"] = to_string(tr.stop);
        s["steps"] = tr.steps;
        s["t_final"] = last.t;
        s["max_u0"] = tr.max_u0;
        s["final_max_u"] = last.max_u;
        s["final_u_boundary"] = last.u_boundary;
        s["max_boundary_value"] = max_boundary;
        s["grad_cap"] = tr.grad_cap;
        s["lobc_tol"] = c.lobc_tol;
        s["lambda1"] = pair ? io::Json(pair->lambda1) : io::Json(nullptr);
        s["z_bound"] = io::nullable(z_bound);
        s["z_fit_C"] = io::nullable(fit_c);
        s["z_fit_worst_slack"] = io::nullable(fit_slack);
        s["largeness_delta"] = c.problem.radius == 1.0 ? io::Json(c.sweep.delta) : io::Json(nullptr);
        s["largeness_integral"] = c.problem.radius == 1.0 ? io::Json(large.integral) : io::Json(nullptr);
        s["params"] = params_echo(c);
        io::Json g;
        g["N"] = grid.N;
        g["h"] = grid.h;
        g["r_max"] = grid.r_max;
        g["eps"] = c.eps;
        s["grid"] = g;
        io::Json f;
        f["lobc"] = ev.lobc_time.has_value();
        f["gbu"] = ev.gbu_time.has_value();
        f["z_within_bound"] = z_ok ? io::Json(*z_ok) : io::Json(nullptr);
        s["flags"] = f;
        io::write_json(dir / "summary.json", s);
    }
    std::cerr << "simulate: stop=" << to_string(tr.stop) << " steps=" << tr.steps << " lobc_time="
              << (ev.lobc_time ? io::format_number(*ev.lobc_time) : "null")
              << " gbu_time=" << (ev.gbu_time ? io::format_number(*ev.gbu_time) : "null") << "\n";
    return ok;
}

// ---------------------------------------------------------------- eigen

/// First pair (larger eps, smaller eps) whose eigenvalues increase beyond a relative tol.
inline std::optional<std::pair<std::size_t, std::size_t>> monotonicity_violation(const std::vector<EigenPair>& pairs,
                                                                                 double tol) {
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pairs[a].eps > pairs[b].eps; });
    for (std::size_t k = 1; k < order.size(); ++k)
        if (pairs[order[k]].lambda1 > pairs[order[k - 1]].lambda1 * (1.0 + tol)) return std::pair{order[k - 1], order[k]};
    return std::nullopt;
}

inline int eigen(const RunConfig& c, const CliOptions& o) {
    if (c.eigen.eps.empty()) throw ConfigError("eigen.eps list is empty");
    for (double e : c.eigen.eps)
        if (!(e >= 0.0) || !(e < 0.25)) throw ConfigError("eigen.eps entries must lie in [0, 1/4)");
    std::vector<EigenPair> pairs(c.eigen.eps.size());
    parallel_for(pairs.size(), o.jobs, [&](std::size_t i) {
        pairs[i] = principal_eigenpair(c.eigen.eps[i], c.problem.params, c.eigen.N, c.eigen.tol);
    });
    const std::filesystem::path dir = output_dir(c, o);
    std::vector<std::vector<io::Cell>> rows;
    for (const EigenPair& e : pairs) {
        rows.push_back({e.eps, e.lambda1, static_cast<double>(e.iterations), e.residual});
        io::write_profile(dir / ("phi_" + format_eps(e.eps) + ".csv"), e.phi, "phi");
    }
    io::write_csv(dir / "eigen.csv", {"eps", "lambda1", "iterations", "residual"}, rows);

    if (const auto bad = monotonicity_violation(pairs, c.eigen.monotonicity_tol)) {
        const EigenPair& big = pairs[bad->first];
        const EigenPair& small = pairs[bad->second];
        std::cerr << "eigen: monotonicity violated: lambda1(" << small.eps << ") = " << small.lambda1 << " > lambda1("
                  << big.eps << ") = " << big.lambda1 << "\n";
        return monotonicity_violation_exit;
    }
    for (const EigenPair& e : pairs)
        std::cerr << "eigen: eps=" << e.eps << " lambda1=" << io::format_number(e.lambda1) << "\n";
    return ok;
}

// ---------------------------------------------------------------- sweep

struct SweepPoint {
    double amplitude = 0.0;
    std::optional<double> lobc_time;
    std::optional<double> gbu_time;
};

inline SweepPoint sweep_point(const RunConfig& c, double amplitude) {
    RunConfig r = c;
    r.problem.u0.amplitude = amplitude;
    SchemeConfig cfg = c.scheme;
    cfg.lobc_latch = c.lobc_tol;
    cfg.snapshot_stride = static_cast<std::size_t>(-1);
    cfg.series_stride = 1;
    const Trajectory tr = evolve(r.problem, make_grid(0.0, r.problem.radius, c.N), cfg);
    const EventReport ev = detect_events(tr, c.lobc_tol, tr.grad_cap);
    return {amplitude, ev.lobc_time, ev.gbu_time};
}

/// Points tried per round; fixed so results do not depend on --jobs.
inline constexpr int sweep_points_per_round = 3;

inline int sweep(const RunConfig& c, const CliOptions& o) {
    if (!c.sweep.lo || !c.sweep.hi) throw ConfigError("sweep needs [sweep] lo and hi");
    double lo = *c.sweep.lo, hi = *c.sweep.hi;
    if (!(lo >= 0.0) || !(hi > lo)) throw ConfigError("sweep bracket must satisfy 0 <= lo < hi");
    if (c.problem.radius != 1.0) throw ConfigError("sweep needs problem.radius = 1");
    std::vector<SweepPoint> all;
    auto run = [&](const std::vector<double>& amps) {
        std::vector<SweepPoint> pts(amps.size());
        parallel_for(amps.size(), o.jobs, [&](std::size_t i) { pts[i] = sweep_point(c, amps[i]); });
        all.insert(all.end(), pts.begin(), pts.end());
        return pts;
    };
    const auto ends = run({lo, hi});
    const std::filesystem::path dir = output_dir(c, o);
    auto write_points = [&] {
        std::vector<SweepPoint> sorted = all;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.amplitude < b.amplitude; });
        std::vector<std::vector<io::Cell>> rows;
        for (const auto& p : sorted) rows.push_back({p.amplitude, p.lobc_time, p.gbu_time});
        io::write_csv(dir / "sweep.csv", {"amplitude", "lobc_time", "gbu_time"}, rows);
    };
    if (ends[0].lobc_time || !ends[1].lobc_time) {
        write_points();
        std::cerr << "sweep: invalid bracket: need no LOBC at lo = " << lo << " and LOBC at hi = " << hi << "\n";
        return invalid_bracket;
    }
    while (hi - lo > c.sweep.rel_width * hi) {
        std::vector<double> amps;
        for (int i = 1; i <= sweep_points_per_round; ++i) amps.push_back(lo + (hi - lo) * i / (sweep_points_per_round + 1));
        const auto pts = run(amps);
        double new_lo = lo, new_hi = hi;
        for (const auto& p : pts) {
            if (p.lobc_time) {
                new_hi = p.amplitude;
                break;
            }
            new_lo = p.amplitude;
        }
        lo = new_lo;
        hi = new_hi;
        std::cerr << "sweep: bracket [" << io::format_number(lo) << ", " << io::format_number(hi) << "]\n";
    }
    write_points();
    const double M = 0.5 * (lo + hi);
    ProblemSpec at = c.problem;
    at.u0.amplitude = M;
    const LargenessResult large = largeness_criterion(sample_initial_data(at, make_grid(0.0, 1.0, c.N)), c.sweep.delta, 0.0);
    io::Json t;
    t["M_emp"] = M;
    t["bracket_lo"] = lo;
    t["bracket_hi"] = hi;
    t["rel_width"] = (hi - lo) / hi;
    t["largeness_delta"] = c.sweep.delta;
    t["largeness_integral"] = large.integral;
    t["evaluations"] = all.size();
    t["N"] = c.N;
    io::Json echo = params_echo(c);
    echo.erase("amplitude");
    t["params"] = echo;
    io::write_json(dir / "threshold.json", t);
    std::cerr << "sweep: M_emp = " << io::format_number(M) << "\n";
    return ok;
}

// ---------------------------------------------------------------- check

inline int check(const RunConfig& c, const CliOptions& o) {
    const std::uint64_t seed = seed_from_env();
    std::vector<std::string> names = c.check.suites.empty() ? checks::suite_names() : c.check.suites;
    for (const auto& n : names)
        if (std::find(checks::suite_names().begin(), checks::suite_names().end(), n) == checks::suite_names().end())
            throw ConfigError("unknown check suite '" + n + "'");
    std::vector<checks::SuiteResult> res(names.size());
    parallel_for(names.size(), o.jobs, [&](std::size_t i) { res[i] = checks::run_suite(names[i], c.check, seed); });
    bool all = true;
    io::Json report, suites, details;
    for (const auto& r : res) {
        suites[r.name] = r.pass;
        details[r.name] = r.detail;
        all = all && r.pass;
        std::cerr << "check: " << r.name << ": " << (r.pass ? "pass" : "FAIL") << " (" << r.detail << ")\n";
    }
    report["seed"] = seed;
    report["all_pass"] = all;
    report["suites"] = suites;
    report["details"] = details;
    io::write_json(output_dir(c, o) / "report.json", report);
    return all ? ok : check_failed;
}

// ---------------------------------------------------------------- entry points

inline int cmd_simulate(const std::string& path, const CliOptions& o = {}) {
    return guarded("simulate", [&] { return simulate(load_config(path), o); });
}
inline int cmd_eigen(const std::string& path, const CliOptions& o = {}) {
    return guarded("eigen", [&] { return eigen(load_config(path), o); });
}
inline int cmd_sweep(const std::string& path, const CliOptions& o = {}) {
    return guarded("sweep", [&] { return sweep(load_config(path), o); });
}
inline int cmd_check(const std::string& path, const CliOptions& o = {}) {
    return guarded("check", [&] { return check(load_config(path), o); });
}

}  // namespace lobc::cli
