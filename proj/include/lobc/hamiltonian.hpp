#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace lobc {

struct SupResult {
    double value = 0.0;
    double argmax = 0.0;
    bool at_cap = false;
};

/// sup over y in [0, cap] of (y*s - g(y)) for convex g with g(0) = 0.
/// Geometric sampling then golden-section refinement around the best sample.
inline SupResult legendre_sup(const std::function<double(double)>& g, double s, double cap,
                              int samples = 400) {
    if (!(cap > 0.0)) throw std::invalid_argument("legendre_sup: cap must be positive");
    auto obj = [&](double y) { return y * s - g(y); };
    const double y_lo = cap * 1e-12;
    const double ratio = std::pow(cap / y_lo, 1.0 / (samples - 1));
    SupResult best{obj(0.0), 0.0, false};
    int best_k = -1;
    double y = y_lo;
    for (int k = 0; k < samples; ++k, y *= ratio) {
        const double yk = (k == samples - 1) ? cap : y;
        const double v = obj(yk);
        if (v > best.value) {
            best = {v, yk, false};
            best_k = k;
        }
    }
    if (best_k < 0) return best;
    double a = best_k == 0 ? 0.0 : y_lo * std::pow(ratio, best_k - 1);
    double b = best_k == samples - 1 ? cap : y_lo * std::pow(ratio, best_k + 1);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = obj(c), fd = obj(d);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * (1.0 + std::abs(b)); ++it) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a); fc = obj(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a); fd = obj(d);
        }
    }
    const double ym = 0.5 * (a + b);
    const double vm = obj(ym);
    if (vm > best.value) best = {vm, ym, false};
    best.at_cap = best.argmax >= cap * (1.0 - 1e-9);
    return best;
}

/// Gradient nonlinearity g(|q|): either |q|^p or a user-supplied convex g with g(0) = 0.
class Hamiltonian {
public:
    static Hamiltonian power_law(double p) {
        if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("power law needs p > 1");
        Hamiltonian h;
        h.p_ = p;
        h.ip_ = (p == std::floor(p) && p <= 8.0) ? static_cast<int>(p) : 0;
        h.label_ = "power";
        return h;
    }

    /// `dg` may be empty, then g' is taken by centered differences.
    static Hamiltonian general(std::function<double(double)> g, std::function<double(double)> dg = {},
                               std::string label = "general") {
        if (!g) throw std::invalid_argument("general Hamiltonian needs g");
        Hamiltonian h;
        h.g_ = std::make_shared<std::function<double(double)>>(std::move(g));
        if (dg) h.dg_ = std::make_shared<std::function<double(double)>>(std::move(dg));
        h.label_ = std::move(label);
        return h;
    }

    bool is_power_law() const { return !g_; }
    double p() const { return p_; }
    const std::string& label() const { return label_; }

    /// g(|q|)
    double value(double q) const {
        const double s = std::abs(q);
        if (g_) return (*g_)(s);
        return ipow(s, p_, ip_);
    }

    /// g'(s) for s >= 0
    double derivative(double s) const {
        s = std::abs(s);
        if (g_) {
            if (dg_) return (*dg_)(s);
            const double d = 1e-6 * (1.0 + s);
            const double lo = std::max(0.0, s - d);
            return ((*g_)(s + d) - (*g_)(lo)) / (s + d - lo);
        }
        if (s == 0.0) return 0.0;
        return p_ * ipow(s, p_ - 1.0, ip_ ? ip_ - 1 : 0);
    }

    /// L(a) = sup_{s >= 0} (a s - g(s)), the convex conjugate restricted to a >= 0.
    double conjugate(double a) const {
        if (a <= 0.0) return 0.0;
        if (!g_) return (p_ - 1.0) * std::pow(a / p_, p_ / (p_ - 1.0));
        double cap = 1.0;
        while (derivative(cap) < a && cap < 1e300) cap *= 4.0;
        return legendre_sup(*g_, a, cap).value;
    }

private:
    static double ipow(double s, double e, int ie) {
        switch (ie) {
        case 1: return s;
        case 2: return s * s;
        case 3: return s * s * s;
        case 4: { const double t = s * s; return t * t; }
        default: break;
        }
        if (ie > 0) {
            double r = 1.0;
            for (int k = 0; k < ie; ++k) r *= s;
            return r;
        }
        return std::pow(s, e);
    }

    double p_ = 2.0;
    int ip_ = 2;
    std::shared_ptr<std::function<double(double)>> g_;
    std::shared_ptr<std::function<double(double)>> dg_;
    std::string label_ = "power";
};

}  // namespace lobc
