#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lobc/core.hpp"
#include "lobc/solver.hpp"

namespace lobc {

class ConfigError : public Error {
public:
    using Error::Error;
};

struct EigenSection {
    std::vector<double> eps;
    std::size_t N = 401;
    double tol = 1e-10;
    double monotonicity_tol = 1e-9;
};

struct SweepSection {
    std::optional<double> lo;
    std::optional<double> hi;
    double rel_width = 0.02;
    double delta = 0.25;  // largeness integral over [delta, 1 - delta]
};

struct CheckSection {
    std::vector<std::string> suites;  // empty means all
    std::string growth_h = "logsq";
    std::optional<double> barrier_mu;
    int barrier_samples = 1000;
    int matrices = 2000;
    double s_max = 1e100;
};

struct RunConfig {
    ProblemSpec problem;
    double p = 3.0;
    double amplitude = 1.0;
    std::size_t N = 401;
    double eps = 0.1;
    SchemeConfig scheme;
    double lobc_tol = 1e-3;
    std::string directory = "out";
    bool write_csv = true;
    bool write_json = true;
    bool z_probe = false;
    EigenSection eigen;
    SweepSection sweep;
    CheckSection check;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> schema{
        {"problem", {"lambda", "Lambda", "n", "p", "radius", "family", "amplitude", "boundary_mode"}},
        {"grid", {"N", "eps"}},
        {"scheme", {"cfl_safety", "grad_cap", "t_max", "series_stride", "lobc_latch", "lobc_tol", "max_steps"}},
        {"outputs", {"directory", "snapshot_stride", "formats", "z_probe"}},
        {"eigen", {"eps", "N", "tol", "monotonicity_tol"}},
        {"sweep", {"lo", "hi", "rel_width", "delta"}},
        {"check", {"suites", "growth_h", "barrier_mu", "barrier_samples", "matrices", "s_max"}},
    };
    return schema;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double to_real(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(x)) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return x;
}

inline long long to_integer(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
    if (used != v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return x;
}

inline std::size_t to_count(const std::string& key, const std::string& v) {
    const long long x = to_integer(key, v);
    if (x <= 0) throw ConfigError(key + ": must be positive");
    return static_cast<std::size_t>(x);
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

}  // namespace detail

/// Parses key = value text under [section] headers; unknown sections or keys are errors.
inline RunConfig parse_config(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    const auto& schema = detail::config_schema();
    RunConfig c;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("key '" + section + "' appears outside any section");
        const auto it = schema.find(section);
        if (it == schema.end()) throw ConfigError("unknown section [" + section + "]");
        for (const auto& [key, node] : body) {
            if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
            const std::string name = section + "." + key;
            const std::string v = detail::trim(node.data());
            using namespace detail;
            if (section == "problem") {
                if (key == "lambda") c.problem.params.lambda = to_real(name, v);
                else if (key == "Lambda") c.problem.params.Lambda = to_real(name, v);
                else if (key == "n") c.problem.params.n = static_cast<int>(to_integer(name, v));
                else if (key == "p") c.p = to_real(name, v);
                else if (key == "radius") c.problem.radius = to_real(name, v);
                else if (key == "amplitude") c.amplitude = to_real(name, v);
                else if (key == "family") {
                    if (v == "cutoff") c.problem.u0.family = InitialFamily::cutoff_plateau;
                    else if (v == "cone") c.problem.u0.family = InitialFamily::cone;
                    else throw ConfigError(name + ": expected cutoff or cone");
                } else if (key == "boundary_mode") {
                    if (v == "generalized") c.problem.boundary_mode = BoundaryMode::generalized;
                    else if (v == "classical") c.problem.boundary_mode = BoundaryMode::classical;
                    else throw ConfigError(name + ": expected generalized or classical");
                }
            } else if (section == "grid") {
                if (key == "N") c.N = to_count(name, v);
                else c.eps = to_real(name, v);
            } else if (section == "scheme") {
                if (key == "cfl_safety") c.scheme.cfl_safety = to_real(name, v);
                else if (key == "grad_cap") c.scheme.grad_cap = to_real(name, v);
                else if (key == "t_max") c.scheme.t_max = to_real(name, v);
                else if (key == "series_stride") c.scheme.series_stride = to_count(name, v);
                else if (key == "lobc_latch") c.scheme.lobc_latch = to_real(name, v);
                else if (key == "lobc_tol") c.lobc_tol = to_real(name, v);
                else c.scheme.max_steps = to_count(name, v);
            } else if (section == "outputs") {
                if (key == "directory") c.directory = v;
                else if (key == "snapshot_stride") c.scheme.snapshot_stride = to_count(name, v);
                else if (key == "z_probe") c.z_probe = to_bool(name, v);
                else {
                    c.write_csv = c.write_json = false;
                    for (const std::string& f : split_list(v)) {
                        if (f == "csv") c.write_csv = true;
                        else if (f == "json") c.write_json = true;
                        else throw ConfigError(name + ": unknown format '" + f + "'");
                    }
                }
            } else if (section == "eigen") {
                if (key == "eps") {
                    c.eigen.eps.clear();
                    for (const std::string& e : split_list(v)) c.eigen.eps.push_back(to_real(name, e));
                } else if (key == "N") c.eigen.N = to_count(name, v);
                else if (key == "tol") c.eigen.tol = to_real(name, v);
                else c.eigen.monotonicity_tol = to_real(name, v);
            } else if (section == "sweep") {
                if (key == "lo") c.sweep.lo = to_real(name, v);
                else if (key == "hi") c.sweep.hi = to_real(name, v);
                else if (key == "rel_width") c.sweep.rel_width = to_real(name, v);
                else c.sweep.delta = to_real(name, v);
            } else if (section == "check") {
                if (key == "suites") c.check.suites = split_list(v);
                else if (key == "growth_h") c.check.growth_h = v;
                else if (key == "barrier_mu") c.check.barrier_mu = to_real(name, v);
                else if (key == "barrier_samples") c.check.barrier_samples = static_cast<int>(to_count(name, v));
                else if (key == "matrices") c.check.matrices = static_cast<int>(to_count(name, v));
                else c.check.s_max = to_real(name, v);
            }
        }
    }

    try {
        c.problem.hamiltonian = Hamiltonian::power_law(c.p);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("problem.p: ") + e.what());
    }
    c.problem.u0.amplitude = c.amplitude;
    try {
        c.problem.validate();
        c.scheme.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (c.amplitude < 0.0) throw ConfigError("problem.amplitude must be nonnegative");
    if (c.N < 3) throw ConfigError("grid.N must be at least 3");
    if (!(c.eps >= 0.0) || !(c.eps < 0.25)) throw ConfigError("grid.eps must lie in [0, 1/4)");
    if (!(c.lobc_tol > 0.0)) throw ConfigError("scheme.lobc_tol must be positive");
    if (!(c.eigen.tol > 0.0)) throw ConfigError("eigen.tol must be positive");
    if (!(c.eigen.monotonicity_tol >= 0.0)) throw ConfigError("eigen.monotonicity_tol must be nonnegative");
    if (!(c.sweep.rel_width > 0.0) || c.sweep.rel_width >= 1.0) throw ConfigError("sweep.rel_width must lie in (0, 1)");
    if (c.check.growth_h != "one" && c.check.growth_h != "log" && c.check.growth_h != "logsq")
        throw ConfigError("check.growth_h must be one, log or logsq");
    if (c.directory.empty()) throw ConfigError("outputs.directory must not be empty");
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace lobc
