#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "gausslt/errors.hpp"

namespace gausslt {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1], ascending
    std::vector<double> weights;
};

namespace detail {

// Legendre P_n(z) and its derivative via the three-term recursion.
inline void legendre_eval(int n, double z, double& p, double& dp) {
    double p0 = 1.0, p1 = z;
    for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (z * p1 - p0) / (z * z - 1.0);
}

inline GaussRule compute_gauss_legendre(int n) {
    GaussRule r;
    r.nodes.assign(n, 0.0);
    r.weights.assign(n, 0.0);
    if (n == 1) {
        r.weights[0] = 2.0;
        return r;
    }
    for (int i = 0; i < n / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double p = 0.0, dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            legendre_eval(n, z, p, dp);
            const double dz = p / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        legendre_eval(n, z, p, dp);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        r.nodes[i] = -z;
        r.nodes[n - 1 - i] = z;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        double p = 0.0, dp = 1.0;
        legendre_eval(n, 0.0, p, dp);
        r.weights[n / 2] = 2.0 / (dp * dp);
    }
    return r;
}

}  // namespace detail

/// Gauss-Legendre rule with n points on [-1, 1]; cached per n, thread-safe.
inline const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw PreconditionError("Gauss-Legendre order must be >= 1", n);
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
    return it->second;
}

/// A flat 1D rule: nodes and weights on some interval.
struct Rule1D {
    std::vector<double> x;
    std::vector<double> w;

    std::size_t size() const noexcept { return x.size(); }
};

/// Composite rule: `order`-point Gauss-Legendre on each panel [b_i, b_{i+1}].
inline Rule1D composite_rule(const std::vector<double>& breaks, int order) {
    const GaussRule& g = gauss_legendre(order);
    Rule1D r;
    r.x.reserve((breaks.size() - 1) * order);
    r.w.reserve((breaks.size() - 1) * order);
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double a = breaks[p], b = breaks[p + 1];
        if (!(b > a)) continue;
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (int j = 0; j < order; ++j) {
            r.x.push_back(mid + half * g.nodes[j]);
            r.w.push_back(half * g.weights[j]);
        }
    }
    return r;
}

/// Panel edges on [0, L] graded towards 0:
///   {0, h/2^sublevels, ..., h/2, h, 2h, 4h, ..., L}.
/// `h` is the width of the feature to resolve; it is clipped to L.
inline std::vector<double> graded_breaks(double L, double h, int sublevels) {
    std::vector<double> b{0.0};
    if (!(L > 0.0)) return b;
    h = std::min(h, L);
    for (int j = sublevels; j >= 1; --j) b.push_back(h * std::ldexp(1.0, -j));
    for (double e = h; e < L * (1.0 - 1e-12); e *= 2.0) b.push_back(e);
    b.push_back(L);
    // drop edges that are closer than a rounding error
    std::vector<double> out{b.front()};
    for (std::size_t i = 1; i < b.size(); ++i)
        if (b[i] > out.back() * (1.0 + 1e-14) + 1e-300) out.push_back(b[i]);
    return out;
}

/// Splits every panel in two (doubles node count at fixed order).
inline std::vector<double> bisect_panels(const std::vector<double>& breaks, int times = 1) {
    std::vector<double> cur = breaks;
    for (int t = 0; t < times; ++t) {
        std::vector<double> next;
        next.reserve(2 * cur.size());
        for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
            next.push_back(cur[i]);
            next.push_back(0.5 * (cur[i] + cur[i + 1]));
        }
        next.push_back(cur.back());
        cur = std::move(next);
    }
    return cur;
}

/// Pairwise (cascade) summation; result depends only on the element order.
inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace gausslt
