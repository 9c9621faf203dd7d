#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lobc/core.hpp"

namespace lobc {

/// Symmetric matrix, upper triangle stored row by row.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0) {
        if (n < 1) throw InvalidArgument("SymMatrix order must be >= 1");
    }

    static SymMatrix identity(int n) {
        SymMatrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static SymMatrix diag(const std::vector<double>& d) {
        SymMatrix m(static_cast<int>(d.size()));
        for (int i = 0; i < m.n_; ++i) m(i, i) = d[i];
        return m;
    }

    int order() const { return n_; }

    double& operator()(int i, int j) { return a_[index(i, j)]; }
    double operator()(int i, int j) const { return a_[index(i, j)]; }

    SymMatrix operator+(const SymMatrix& o) const {
        SymMatrix r = *this;
        for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] += o.a_[k];
        return r;
    }
    SymMatrix operator*(double t) const {
        SymMatrix r = *this;
        for (double& x : r.a_) x *= t;
        return r;
    }
    SymMatrix operator-() const { return *this * -1.0; }

    bool finite() const {
        return std::all_of(a_.begin(), a_.end(), [](double x) { return std::isfinite(x); });
    }

    /// Row-major dense copy.
    std::vector<double> dense() const {
        std::vector<double> d(static_cast<std::size_t>(n_) * n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) d[static_cast<std::size_t>(i) * n_ + j] = (*this)(i, j);
        return d;
    }

private:
    std::size_t index(int i, int j) const {
        if (i > j) std::swap(i, j);
        return static_cast<std::size_t>(i) * n_ - static_cast<std::size_t>(i) * (i - 1) / 2 + (j - i);
    }

    int n_ = 0;
    std::vector<double> a_;
};

struct EigenDecomposition {
    std::vector<double> values;
    std::vector<double> vectors;  // column k is the eigenvector of values[k], row-major n x n
};

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
inline EigenDecomposition jacobi_eigen(const SymMatrix& X, int max_sweeps = 64) {
    if (!X.finite()) throw InvalidArgument("matrix has non-finite entries");
    const int n = X.order();
    std::vector<double> a = X.dense();
    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;
    auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
    auto V = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(i) * n + j]; };

    double scale = 0.0;
    for (double x : a) scale += x * x;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
        if (off <= 1e-32 * scale || off == 0.0) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    EigenDecomposition out;
    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = A(i, i);
    out.vectors = std::move(v);
    return out;
}

inline std::vector<double> eigenvalues(const SymMatrix& X) { return jacobi_eigen(X).values; }

namespace detail {
inline void check_order(const SymMatrix& X, const PucciParams& params) {
    if (X.order() != params.n) throw InvalidArgument("matrix order does not match dimension n");
}
}  // namespace detail

/// lambda * (sum of positive eigenvalues) + Lambda * (sum of negative eigenvalues)
inline double pucci_minus(const SymMatrix& X, const PucciParams& params) {
    detail::check_order(X, params);
    double pos = 0.0, neg = 0.0;
    for (double e : eigenvalues(X)) (e > 0.0 ? pos : neg) += e;
    return params.lambda * pos + params.Lambda * neg;
}

inline double pucci_plus(const SymMatrix& X, const PucciParams& params) {
    detail::check_order(X, params);
    double pos = 0.0, neg = 0.0;
    for (double e : eigenvalues(X)) (e > 0.0 ? pos : neg) += e;
    return params.Lambda * pos + params.lambda * neg;
}

inline double theta(double s, const PucciParams& params) { return s > 0.0 ? params.lambda : params.Lambda; }

/// min over a, b in {lambda, Lambda} of a*upp + b*(n-1)/r*up
inline double pucci_minus_radial(double upp, double up, double r, const PucciParams& params) {
    if (!(r > 0.0)) throw InvalidArgument("pucci_minus_radial needs r > 0; use origin_limit at r = 0");
    return theta(upp, params) * upp + theta(up, params) * (static_cast<double>(params.n - 1) / r) * up;
}

/// Value of the radial operator at r = 0 where D^2u = u''(0) I.
inline double origin_limit(double upp, const PucciParams& params) {
    return static_cast<double>(params.n) * theta(upp, params) * upp;
}

}  // namespace lobc
