#pragma once

#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gausslt/errors.hpp"

namespace gausslt {

/// Derivative orders (k_1, ..., k_d); d is the length.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> k) : k_(std::move(k)) {
        for (int ki : k_)
            if (ki < 0) throw PreconditionError("multi-index entries must be >= 0", ki);
    }
    static MultiIndex zeros(std::size_t d) { return MultiIndex(std::vector<int>(d, 0)); }

    std::size_t dim() const noexcept { return k_.size(); }
    int abs() const noexcept { return std::accumulate(k_.begin(), k_.end(), 0); }
    int operator[](std::size_t i) const { return k_[i]; }
    const std::vector<int>& values() const noexcept { return k_; }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<int> k_;
};

/// Probabilists' Hermite polynomial He_n(u) by three-term recursion.
inline double hermite_he(int n, double u) noexcept {
    if (n == 0) return 1.0;
    double prev = 1.0, cur = u;
    for (int j = 1; j < n; ++j) {
        const double next = u * cur - double(j) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

inline double heat_kernel(std::span<const double> x, double eps) {
    if (!(eps > 0.0)) throw PreconditionError("heat kernel requires eps > 0", eps);
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    const double d = double(x.size());
    return std::exp(-r2 / (2.0 * eps)) * std::pow(2.0 * std::numbers::pi * eps, -0.5 * d);
}

/// Mixed partial derivative of the heat kernel:
///   p_eps^{(k)}(x) = (-eps^{-1/2})^{|k|} prod_i He_{k_i}(x_i / sqrt(eps)) p_eps(x).
inline double heat_kernel_deriv(std::span<const double> x, double eps, const MultiIndex& k) {
    if (!(eps > 0.0)) throw PreconditionError("heat kernel requires eps > 0", eps);
    if (k.dim() != x.size())
        throw PreconditionError("multi-index length " + std::to_string(k.dim()) +
                                    " does not match point dimension " + std::to_string(x.size()),
                                double(x.size()));
    const double rs = 1.0 / std::sqrt(eps);
    double herm = 1.0, r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        herm *= hermite_he(k[i], x[i] * rs);
        r2 += x[i] * x[i];
    }
    const int order = k.abs();
    const double sign = (order % 2 == 0) ? 1.0 : -1.0;
    return sign * std::pow(rs, order) * herm * std::exp(-r2 / (2.0 * eps)) *
           std::pow(2.0 * std::numbers::pi * eps, -0.5 * double(x.size()));
}

inline double heat_kernel(std::initializer_list<double> x, double eps) {
    return heat_kernel(std::span<const double>(x.begin(), x.size()), eps);
}
inline double heat_kernel_deriv(std::initializer_list<double> x, double eps, const MultiIndex& k) {
    return heat_kernel_deriv(std::span<const double>(x.begin(), x.size()), eps, k);
}

}  // namespace gausslt
