#pragma once

// Closed forms of the three bivariate Gaussian-Fourier integrals
//
//   L1 = (-1)^k/(2 pi) \int exp{-Q/2 + i y1 x} y2^k (y1-y2)^k dy
//   L2 = same with the two-process quadratic form
//   L3 = (-1)^k/(2 pi) \int exp{-Q/2} y2^k y1^k dy
//
// as finite sums with integer coefficients.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gausslt/errors.hpp"

namespace gausslt {

inline constexpr int kMaxLemmaOrder = 8;

namespace detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r)) throw InternalError("integer overflow in lemma coefficient");
    return r;
}

inline std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;  // exact at every step
    return r;
}

/// (n)!! with (-1)!! = 0!! = 1.
inline std::int64_t double_factorial(int n) {
    std::int64_t r = 1;
    for (int i = n; i > 1; i -= 2) r = checked_mul(r, i);
    return r;
}

}  // namespace detail

/// c_{k,l,m,n} = (-1)^{l-(m+n)/2} C(k,l) C(k+l,m) C(2k-m,n) (m-1)!! (n-1)!!
inline std::int64_t coeff_cklmn_exact(int k, int l, int m, int n) {
    if (k < 0 || l < 0 || l > k)
        throw PreconditionError("coeff_cklmn: need 0 <= l <= k", l);
    if (m < 0 || m > k + l || m % 2 != 0)
        throw PreconditionError("coeff_cklmn: m must be even with 0 <= m <= k+l", m);
    if (n < 0 || n > 2 * k - m || n % 2 != 0)
        throw PreconditionError("coeff_cklmn: n must be even with 0 <= n <= 2k-m", n);
    std::int64_t c = detail::binomial(k, l);
    c = detail::checked_mul(c, detail::binomial(k + l, m));
    c = detail::checked_mul(c, detail::binomial(2 * k - m, n));
    c = detail::checked_mul(c, detail::double_factorial(m - 1));
    c = detail::checked_mul(c, detail::double_factorial(n - 1));
    const int e = l - (m + n) / 2;
    return (e % 2 == 0) ? c : -c;
}

inline double coeff_cklmn(int k, int l, int m, int n) { return double(coeff_cklmn_exact(k, l, m, n)); }

/// c_{k,l} = (l-1)!! C(k,l) (2k-l-1)!!
inline std::int64_t coeff_ckl_exact(int k, int l) {
    if (k < 0 || l < 0 || l > k || l % 2 != 0)
        throw PreconditionError("coeff_ckl: need even l with 0 <= l <= k", l);
    return detail::checked_mul(detail::checked_mul(detail::double_factorial(l - 1), detail::binomial(k, l)),
                               detail::double_factorial(2 * k - l - 1));
}

namespace detail {

struct Lemma1Term {
    double coef;
    int rPow;       // exponent of (eps-b)/(a+2eps): k+l-m
    int aHalf;      // A^{-1/2} * A^{-aHalf}, aHalf = m/2
    int deltaPow;   // Delta^{-1/2} * Delta^{-deltaPow}, deltaPow = 2k-m-n/2
    int xPow;       // 2k-m-n
};

/// Terms of the quadratic kernel triple sum for one k; coefficients with equal
/// monomials are merged in exact arithmetic before conversion.
inline std::vector<Lemma1Term> build_lemma1_terms(int k) {
    std::vector<std::pair<std::array<int, 4>, std::int64_t>> acc;
    for (int l = 0; l <= k; ++l)
        for (int m = 0; m <= k + l; m += 2)
            for (int n = 0; n <= 2 * k - m; n += 2) {
                const std::array<int, 4> key{k + l - m, m / 2, 2 * k - m - n / 2, 2 * k - m - n};
                const std::int64_t c = coeff_cklmn_exact(k, l, m, n);
                bool merged = false;
                for (auto& [kk, v] : acc)
                    if (kk == key) {
                        v += c;
                        merged = true;
                        break;
                    }
                if (!merged) acc.emplace_back(key, c);
            }
    std::vector<Lemma1Term> out;
    for (auto& [key, c] : acc)
        if (c != 0) out.push_back({double(c), key[0], key[1], key[2], key[3]});
    return out;
}

inline const std::vector<Lemma1Term>& lemma1_terms(int k) {
    static const auto table = [] {
        std::array<std::vector<Lemma1Term>, kMaxLemmaOrder + 1> t;
        for (int j = 0; j <= kMaxLemmaOrder; ++j) t[j] = build_lemma1_terms(j);
        return t;
    }();
    return table.at(k);
}

inline const std::vector<double>& lemma3_coeffs(int k) {
    static const auto table = [] {
        std::array<std::vector<double>, kMaxLemmaOrder + 1> t;
        for (int j = 0; j <= kMaxLemmaOrder; ++j)
            for (int l = 0; l <= j; l += 2) t[j].push_back(double(coeff_ckl_exact(j, l)));
        return t;
    }();
    return table.at(k);
}

inline void check_order(int k) {
    if (k < 0 || k > kMaxLemmaOrder)
        throw PreconditionError("lemma order k must lie in [0, " + std::to_string(kMaxLemmaOrder) + "]", k);
}

/// quadratic kernel sum in reduced variables A = a+2eps, r = (eps-b)/A, Delta.
/// Unchecked; callers guarantee A > 0 and Delta > 0.
inline double lemma1_sum(int k, double A, double r, double delta, double x) noexcept {
    const auto& terms = lemma1_terms(k);
    const double gauss = std::exp(-x * x / (2.0 * delta)) / std::sqrt(A * delta);
    if (k == 0) return gauss;
    constexpr int N = 2 * kMaxLemmaOrder + 1;
    std::array<double, N> rp{}, ap{}, dp{}, xp{};
    rp[0] = ap[0] = dp[0] = xp[0] = 1.0;
    const double ia = 1.0 / A, id = 1.0 / delta;
    for (int j = 1; j <= 2 * k; ++j) {
        rp[j] = rp[j - 1] * r;
        ap[j] = ap[j - 1] * ia;
        dp[j] = dp[j - 1] * id;
        xp[j] = xp[j - 1] * x;
    }
    double s = 0.0;
    for (const auto& t : terms) s += t.coef * rp[t.rPow] * ap[t.aHalf] * dp[t.deltaPow] * xp[t.xPow];
    return s * gauss;
}

/// symmetric kernel sum given b and det = (a+eps)(c+eps) - b^2 > 0. Unchecked.
inline double lemma3_sum(int k, double b, double det) noexcept {
    const double base = 1.0 / std::sqrt(det);
    if (k == 0) return base;
    const auto& c = lemma3_coeffs(k);
    const double id = 1.0 / det;
    if (k == 1) return b * id * base;
    std::array<double, kMaxLemmaOrder + 1> bp{}, ip{};
    bp[0] = ip[0] = 1.0;
    for (int j = 1; j <= k; ++j) {
        bp[j] = bp[j - 1] * b;
        ip[j] = ip[j - 1] * id;
    }
    // term l = 2i: c_{k,l} b^{k-l} det^{-(k - l/2)}
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * bp[k - 2 * i] * ip[k - i];
    return s * base;
}

}  // namespace detail

struct QuadKernelParams {
    double a, b, c, eps, x;
    int k;

    QuadKernelParams(double a_, double b_, double c_, double eps_, double x_, int k_)
        : a(a_), b(b_), c(c_), eps(eps_), x(x_), k(k_) {
        detail::check_order(k);
        detail::require(a > 0.0, "quadratic kernel requires a > 0", a);
        detail::require(c > 0.0, "quadratic kernel requires c > 0", c);
        detail::require(eps >= 0.0, "quadratic kernel requires eps >= 0", eps);
        const double D = delta();
        detail::require(D > 0.0, "quadratic kernel requires Delta > 0, got Delta = " + std::to_string(D), D);
    }

    double delta() const noexcept { return c + eps - (b - eps) * (b - eps) / (a + 2.0 * eps); }
};

struct CrossKernelParams {
    double a1, b1, c1, a2, b2, c2, eps, x;
    int k;

    CrossKernelParams(double a1_, double b1_, double c1_, double a2_, double b2_, double c2_, double eps_,
                      double x_, int k_)
        : a1(a1_), b1(b1_), c1(c1_), a2(a2_), b2(b2_), c2(c2_), eps(eps_), x(x_), k(k_) {
        detail::check_order(k);
        detail::require(a1 > 0.0, "cross kernel requires a1 > 0", a1);
        detail::require(c1 > 0.0, "cross kernel requires c1 > 0", c1);
        detail::require(a2 >= 0.0, "cross kernel requires a2 >= 0", a2);
        detail::require(c2 >= 0.0, "cross kernel requires c2 >= 0", c2);
        detail::require(eps >= 0.0, "cross kernel requires eps >= 0", eps);
        const double D = delta();
        detail::require(D > 0.0, "cross kernel requires Delta' > 0, got Delta' = " + std::to_string(D), D);
    }

    // Reduced single-form coefficients (a, b, c) of the combined quadratic form.
    double reduced_a() const noexcept { return a1 + a2; }
    double reduced_b() const noexcept { return b1 - a2 - b2; }
    double reduced_c() const noexcept { return c1 + c2 + a2 + 2.0 * b2; }

    double delta() const noexcept {
        const double num = b1 - b2 - a2 - eps;
        return c1 + c2 + a2 + 2.0 * b2 + eps - num * num / (a1 + a2 + 2.0 * eps);
    }
};

struct SymKernelParams {
    double a, b, c, eps;
    int k;

    SymKernelParams(double a_, double b_, double c_, double eps_, int k_) : a(a_), b(b_), c(c_), eps(eps_), k(k_) {
        detail::check_order(k);
        detail::require(a > 0.0, "symmetric kernel requires a > 0", a);
        detail::require(c > 0.0, "symmetric kernel requires c > 0", c);
        detail::require(eps >= 0.0, "symmetric kernel requires eps >= 0", eps);
        const double D = discriminant();
        detail::require(D > 0.0, "symmetric kernel requires (a+eps)(c+eps) - b^2 > 0, got " + std::to_string(D), D);
    }

    double discriminant() const noexcept { return (a + eps) * (c + eps) - b * b; }
};

inline double lemma1_closed(const QuadKernelParams& p) {
    const double D = p.delta();
    if (!(D > 0.0)) throw PreconditionError("quadratic kernel requires Delta > 0", D);
    const double A = p.a + 2.0 * p.eps;
    return detail::lemma1_sum(p.k, A, (p.eps - p.b) / A, D, p.x);
}

/// Delegates to the quadratic kernel sum on the reduced form
/// (a, b, c) = (a1+a2, b1-a2-b2, c1+c2+a2+2b2).
inline double lemma2_closed(const CrossKernelParams& p) {
    const double D = p.delta();
    if (!(D > 0.0)) throw PreconditionError("cross kernel requires Delta' > 0", D);
    const double A = p.reduced_a() + 2.0 * p.eps;
    return detail::lemma1_sum(p.k, A, (p.eps - p.reduced_b()) / A, D, p.x);
}

inline double lemma3_closed(const SymKernelParams& p) {
    const double D = p.discriminant();
    if (!(D > 0.0)) throw PreconditionError("symmetric kernel requires a positive discriminant", D);
    return detail::lemma3_sum(p.k, p.b, D);
}

}  // namespace gausslt
