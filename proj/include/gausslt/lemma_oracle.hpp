#pragma once

// Brute-force 2D quadrature of the left-hand sides of the lemma identities.
// Shares nothing with lemma_kernels.hpp beyond the parameter structs: the
// integrand is assembled from the raw exponent exactly as written.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>
#include <vector>

#include "gausslt/errors.hpp"
#include "gausslt/lemma_kernels.hpp"
#include "gausslt/quadrature.hpp"

namespace gausslt {

enum class LemmaKind { L1, L2, L3 };

inline const char* to_string(LemmaKind k) {
    switch (k) {
        case LemmaKind::L1: return "L1";
        case LemmaKind::L2: return "L2";
        case LemmaKind::L3: return "L3";
    }
    return "?";
}

/// Unvalidated integrand parameters. For L1/L3 only (a, b, c) are used; for
/// L2 (a, b, c) are the first process' (a1, b1, c1) and (a2, b2, c2) the second's.
struct OracleParams {
    double a = 1, b = 0, c = 1;
    double a2 = 0, b2 = 0, c2 = 0;
    double eps = 0, x = 0;
    int k = 0;

    static OracleParams from(const QuadKernelParams& p) { return {p.a, p.b, p.c, 0, 0, 0, p.eps, p.x, p.k}; }
    static OracleParams from(const CrossKernelParams& p) {
        return {p.a1, p.b1, p.c1, p.a2, p.b2, p.c2, p.eps, p.x, p.k};
    }
    static OracleParams from(const SymKernelParams& p) { return {p.a, p.b, p.c, 0, 0, 0, p.eps, 0.0, p.k}; }
};

struct OracleOptions {
    int order = 10;              // Gauss points per panel
    int minNodesPerAxis = 400;
    double radiusScale = 10.0;   // R = radiusScale / sqrt(lambda_min)
    double imagTol = 1e-8;
};

namespace detail {

// Exponent -Q(y1,y2)/2 written term by term from the lemma statements.
inline double oracle_exponent(LemmaKind kind, const OracleParams& p, double y1, double y2) noexcept {
    const double d = y1 - y2;
    switch (kind) {
        case LemmaKind::L1:
            return -0.5 * (y2 * y2 * p.a + 2.0 * y2 * y1 * p.b + y1 * y1 * p.c) -
                   0.5 * p.eps * (d * d + y2 * y2);
        case LemmaKind::L2:
            return -0.5 * ((y2 * y2 * p.a + 2.0 * y2 * y1 * p.b + y1 * y1 * p.c) +
                           (d * d * p.a2 + 2.0 * d * y1 * p.b2 + y1 * y1 * p.c2)) -
                   0.5 * p.eps * (d * d + y2 * y2);
        case LemmaKind::L3:
            return -0.5 * (y2 * y2 * p.a + 2.0 * y2 * y1 * p.b + y1 * y1 * p.c) -
                   0.5 * p.eps * (y2 * y2 + y1 * y1);
    }
    return 0.0;
}

inline double oracle_poly(LemmaKind kind, int k, double y1, double y2) noexcept {
    if (kind == LemmaKind::L3) return std::pow(y2 * y1, k);
    return std::pow(y2 * (y1 - y2), k);
}

}  // namespace detail

/// Numerical value of the lemma's left-hand side on [-R, R]^2.
inline double oracle_quad2d(const OracleParams& p, LemmaKind kind, const OracleOptions& opt = {}) {
    if (p.k < 0) throw PreconditionError("oracle: k must be >= 0", p.k);
    // Recover the symmetric matrix of -2 * exponent by polarization.
    const double q11 = -2.0 * detail::oracle_exponent(kind, p, 1.0, 0.0);
    const double q22 = -2.0 * detail::oracle_exponent(kind, p, 0.0, 1.0);
    // q(1,1) = q11 + 2 q12 + q22
    const double q11p22 = -2.0 * detail::oracle_exponent(kind, p, 1.0, 1.0);
    const double off = 0.5 * (q11p22 - q11 - q22);
    const double tr = q11 + q22, det = q11 * q22 - off * off;
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    const double lmin = 0.5 * tr - disc, lmax = 0.5 * tr + disc;
    if (!(q11 > 0.0 && det > 0.0 && lmin > 0.0))
        throw PreconditionError("oracle: quadratic form is not positive definite (det = " + std::to_string(det) +
                                    ")",
                                det);

    const double R = opt.radiusScale / std::sqrt(lmin);
    // Panels narrow enough for the stiff direction and the oscillation.
    double width = 1.5 / std::sqrt(lmax);
    if (std::abs(p.x) > 0.0) width = std::min(width, 2.0 / std::abs(p.x));
    int panels = int(std::ceil(2.0 * R / width));
    panels = std::max(panels, (opt.minNodesPerAxis + opt.order - 1) / opt.order);
    std::vector<double> breaks(panels + 1);
    for (int i = 0; i <= panels; ++i) breaks[i] = -R + 2.0 * R * double(i) / double(panels);
    const Rule1D rule = composite_rule(breaks, opt.order);
    const std::size_t n = rule.size();

    std::vector<double> cs(n), sn(n);
    for (std::size_t i = 0; i < n; ++i) {
        cs[i] = std::cos(rule.x[i] * p.x);
        sn[i] = std::sin(rule.x[i] * p.x);
    }

    std::vector<double> re(n), im(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {  // y1
        const double y1 = rule.x[i];
        double sr = 0.0, sa = 0.0;
        for (std::size_t j = 0; j < n; ++j) {  // y2
            const double y2 = rule.x[j];
            const double v = rule.w[j] * std::exp(detail::oracle_exponent(kind, p, y1, y2)) *
                             detail::oracle_poly(kind, p.k, y1, y2);
            sr += v;
            sa += std::abs(v);
        }
        re[i] = rule.w[i] * sr * cs[i];
        im[i] = rule.w[i] * sr * sn[i];
        ab[i] = rule.w[i] * sa;
    }
    const double sign = (p.k % 2 == 0) ? 1.0 : -1.0;
    const double norm = sign / (2.0 * std::numbers::pi);
    const double realPart = norm * pairwise_sum(re);
    const double imagPart = norm * pairwise_sum(im);
    const double mass = pairwise_sum(ab) / (2.0 * std::numbers::pi);
    if (std::abs(imagPart) > opt.imagTol * std::max(std::abs(realPart), 1e-6 * mass))
        throw InternalError("oracle: imaginary residual " + std::to_string(imagPart) + " vs real part " +
                            std::to_string(realPart));
    return realPart;
}

template <class Params>
double oracle_quad2d(const Params& p, const OracleOptions& opt = {}) {
    if constexpr (std::is_same_v<Params, QuadKernelParams>)
        return oracle_quad2d(OracleParams::from(p), LemmaKind::L1, opt);
    else if constexpr (std::is_same_v<Params, CrossKernelParams>)
        return oracle_quad2d(OracleParams::from(p), LemmaKind::L2, opt);
    else
        return oracle_quad2d(OracleParams::from(p), LemmaKind::L3, opt);
}

}  // namespace gausslt
