#pragma once

// Second moment of the eps-regularized local-time derivative
//
//   E|L_eps^{(k)}(T,x)|^2 = (2 pi)^{-d} \int_{[0,T]^4} prod_i G_i dt ds,
//
// where each coordinate factor G_i is one of the closed-form bivariate
// integrals of lemma_kernels.hpp. The time integral is a tensor product of
// graded Gauss-Legendre rules, one 2D node list per process.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "gausslt/covariance.hpp"
#include "gausslt/errors.hpp"
#include "gausslt/field.hpp"
#include "gausslt/heat_kernel.hpp"
#include "gausslt/lemma_kernels.hpp"
#include "gausslt/parallel.hpp"
#include "gausslt/quadrature.hpp"

namespace gausslt {

struct QuadPlan {
    int order = 4;              // Gauss points per panel
    int sublevels = 2;          // dyadic panels below the eps scale
    double relTol = 1e-3;       // successive-refinement agreement
    double absTol = 0.0;        // floor for values that vanish by symmetry
    int maxRefinements = 2;     // panel bisections before giving up
    unsigned jobs = 0;          // 0: GAUSSLT_JOBS or 1
};

enum class RegionKind { FULL_SQUARE, D_ORDERED, D_GAMMA };

/// Time region for one process pair (t1, t2); the 4D region is the product of
/// the same kind for both processes.
struct TimeRegion {
    RegionKind kind = RegionKind::D_ORDERED;
    double gamma = 2.0;   // D_GAMMA only
    double T = 1.0;

    /// Upper bound on the relative increment (t2-t1)/t1 inside D_GAMMA.
    double relative_cap() const noexcept { return std::min(T, 1.0) / (2.0 * gamma); }

    bool contains(double t2, double t1, double s2, double s1) const noexcept {
        auto in_pair = [&](double hi, double lo) {
            switch (kind) {
                case RegionKind::FULL_SQUARE: return lo >= 0 && lo <= T && hi >= 0 && hi <= T;
                case RegionKind::D_ORDERED: return 0 < lo && lo < hi && hi < T;
                case RegionKind::D_GAMMA:
                    return 0 < lo && lo < hi && hi < T && (hi - lo) / lo < relative_cap() && T / 4 < lo &&
                           lo < T / 2;
            }
            return false;
        };
        return in_pair(t2, t1) && in_pair(s2, s1);
    }
};

struct MomentResult {
    double value = 0.0;       // finest estimate
    double coarse = 0.0;      // previous refinement level
    double I1 = 0.0;          // general path only, finest level
    double I2 = 0.0;
    int refinements = 0;
    std::size_t nodes1 = 0;   // per-process pair-node counts at the finest level
    std::size_t nodes2 = 0;
};

namespace detail {

/// Per-process pair nodes (structure of arrays). For ordered regions the
/// triple is (increment variance, increment-past covariance, past variance);
/// for the full square it is (var t2, cov(t1,t2), var t1).
struct PairNodes {
    std::vector<double> w, p, q, r;
    std::size_t size() const noexcept { return w.size(); }
    void push(double wi, double pi, double qi, double ri) {
        w.push_back(wi);
        p.push_back(pi);
        q.push_back(qi);
        r.push_back(ri);
    }
};

inline double eps_scale(const CovarianceModel& m, double eps) { return std::pow(eps, 1.0 / (2.0 * m.H())); }

inline PairNodes build_pairs(const CovarianceModel& m, const TimeRegion& reg, double eps, int order, int sublevels,
                             int bisections) {
    const double T = reg.T;
    const double h = eps_scale(m, eps);
    PairNodes out;
    auto add_ordered = [&](double t1, double t2, double w) {
        out.push(w, m.increment_variance(t1, t2), m.eval(t1, t2) - m.eval(t1, t1), m.eval(t1, t1));
    };

    if (reg.kind == RegionKind::D_GAMMA) {
        // t1 in (T/4, T/2), u = t2 - t1 in (0, cap * t1)
        const double cap = reg.relative_cap();
        const Rule1D outer = composite_rule(bisect_panels({T / 4, 3 * T / 8, T / 2}, bisections), order);
        for (std::size_t i = 0; i < outer.size(); ++i) {
            const double t1 = outer.x[i];
            const Rule1D inner =
                composite_rule(bisect_panels(graded_breaks(cap * t1, h, sublevels), bisections), order);
            for (std::size_t j = 0; j < inner.size(); ++j) add_ordered(t1, t1 + inner.x[j], outer.w[i] * inner.w[j]);
        }
        return out;
    }

    // u = t2 - t1 in (0, T) graded at 0; t1 in (0, T - u) graded at 0.
    const Rule1D ru = composite_rule(bisect_panels(graded_breaks(T, h, sublevels), bisections), order);
    for (std::size_t i = 0; i < ru.size(); ++i) {
        const double u = ru.x[i];
        const Rule1D rt = composite_rule(bisect_panels(graded_breaks(T - u, h, sublevels), bisections), order);
        for (std::size_t j = 0; j < rt.size(); ++j) {
            const double t1 = rt.x[j], t2 = t1 + u, w = ru.w[i] * rt.w[j];
            if (reg.kind == RegionKind::D_ORDERED) {
                add_ordered(t1, t2, w);
            } else {
                const double v1 = m.eval(t1, t1), v2 = m.eval(t2, t2), c = m.eval(t1, t2);
                out.push(w, v2, c, v1);  // t2 > t1
                out.push(w, v1, c, v2);  // mirrored pair t1 > t2
            }
        }
    }
    return out;
}

/// Coordinates sharing (k_i, x_i) contribute identical factors.
struct CoordGroup {
    int k;
    double x;
    int count;
};

inline std::vector<CoordGroup> group_coordinates(const FieldSpec& s) {
    std::vector<CoordGroup> g;
    for (std::size_t i = 0; i < s.d(); ++i) {
        auto it = std::find_if(g.begin(), g.end(), [&](const CoordGroup& c) { return c.k == s.k[i] && c.x == s.x[i]; });
        if (it == g.end())
            g.push_back({s.k[i], s.x[i], 1});
        else
            ++it->count;
    }
    return g;
}

inline double ipow(double v, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= v;
    return r;
}

inline void check_lemma_orders(const FieldSpec& s) {
    for (std::size_t i = 0; i < s.d(); ++i) check_order(s.k[i]);
}

struct GeneralSums {
    double I1 = 0.0;
    double I2 = 0.0;
};

inline GeneralSums general_sums(const FieldSpec& s, const PairNodes& n1, const PairNodes& n2, unsigned jobs,
                                bool withI2 = true) {
    const auto groups = group_coordinates(s);
    const double eps = s.eps;
    auto row = [&](std::size_t i, bool second) {
        double acc = 0.0;
        const double w1 = n1.w[i], a1 = n1.p[i], b1 = n1.q[i], c1 = n1.r[i];
        for (std::size_t j = 0; j < n2.size(); ++j) {
            const double a2 = n2.p[j], b2 = n2.q[j], c2 = n2.r[j];
            double A, B, C;
            if (!second) {
                A = a1 + a2;
                B = b1 + b2;
                C = c1 + c2;
            } else {
                A = a1 + a2;
                B = b1 - a2 - b2;
                C = c1 + c2 + a2 + 2.0 * b2;
            }
            const double Ae = A + 2.0 * eps;
            const double be = B - eps;
            const double delta = C + eps - be * be / Ae;
            if (!(delta > 0.0))
                throw InternalError("Delta <= 0 at an interior quadrature node (Delta = " + std::to_string(delta) + ")");
            const double r = -be / Ae;
            double prod = 1.0;
            for (const auto& g : groups) prod *= ipow(lemma1_sum(g.k, Ae, r, delta, g.x), g.count);
            acc += n2.w[j] * prod;
        }
        return w1 * acc;
    };
    GeneralSums out;
    out.I1 = parallel_sum(n1.size(), jobs, [&](std::size_t i) { return row(i, false); }, 16);
    if (withI2) out.I2 = parallel_sum(n1.size(), jobs, [&](std::size_t i) { return row(i, true); }, 16);
    return out;
}

inline double at_zero_sum(const FieldSpec& s, const PairNodes& n1, const PairNodes& n2, unsigned jobs) {
    const auto groups = group_coordinates(s);
    const double eps = s.eps;
    return parallel_sum(
        n1.size(), jobs,
        [&](std::size_t i) {
            double acc = 0.0;
            const double v2a = n1.p[i], ca = n1.q[i], v1a = n1.r[i];
            for (std::size_t j = 0; j < n2.size(); ++j) {
                const double a = v2a + n2.p[j], b = ca + n2.q[j], c = v1a + n2.r[j];
                const double det = (a + eps) * (c + eps) - b * b;
                if (!(det > 0.0)) throw InternalError("non-positive discriminant at a quadrature node");
                double prod = 1.0;
                for (const auto& g : groups) prod *= ipow(lemma3_sum(g.k, b, det), g.count);
                acc += n2.w[j] * prod;
            }
            return n1.w[i] * acc;
        },
        16);
}

/// Runs `level(b)` for b = 0, 1, ... bisections until two successive values
/// agree to plan.relTol.
template <class Level>
MomentResult refine_until_converged(const QuadPlan& plan, Level&& level, const char* what) {
    MomentResult prev = level(0);
    for (int b = 1; b <= plan.maxRefinements; ++b) {
        MomentResult cur = level(b);
        cur.coarse = prev.value;
        cur.refinements = b;
        if (std::abs(cur.value - prev.value) <= std::max(plan.relTol * std::abs(cur.value), plan.absTol)) return cur;
        prev = cur;
    }
    throw ConvergenceError(std::string(what) + ": refinements did not agree to relative " +
                               std::to_string(plan.relTol) + " (coarse " + std::to_string(prev.coarse) +
                               ", fine " + std::to_string(prev.value) + ")",
                           prev.coarse, prev.value);
}

}  // namespace detail

namespace detail {

struct OrderedTriple {
    double a, b, c;   // increment variance, increment-past covariance, past variance
};

inline OrderedTriple ordered_triple(const CovarianceModel& m, double lo, double hi) {
    return {m.increment_variance(lo, hi), m.eval(lo, hi) - m.eval(lo, lo), m.eval(lo, lo)};
}

inline void check_point(const FieldSpec& spec, double t2, double t1, double s2, double s1, std::size_t i) {
    spec.validate();
    if (i >= spec.d()) throw PreconditionError("coordinate index out of range", double(i));
    const TimeRegion reg{RegionKind::D_ORDERED, 2.0, spec.T};
    if (!reg.contains(t2, t1, s2, s1))
        throw PreconditionError("time point must satisfy 0 < t1 < t2 < T and 0 < s1 < s2 < T");
}

}  // namespace detail

/// Integrand factor of I1 for coordinate i at an ordered time point.
inline double f1_coordinate(const FieldSpec& spec, double t2, double t1, double s2, double s1, std::size_t i) {
    detail::check_point(spec, t2, t1, s2, s1, i);
    const auto p = detail::ordered_triple(spec.model1, t1, t2);
    const auto q = detail::ordered_triple(spec.model2, s1, s2);
    return lemma1_closed(QuadKernelParams(p.a + q.a, p.b + q.b, p.c + q.c, spec.eps, spec.x[i], spec.k[i]));
}

/// Integrand factor of I2 for coordinate i; process 1 supplies (a1, b1, c1).
inline double f2_coordinate(const FieldSpec& spec, double t2, double t1, double s2, double s1, std::size_t i) {
    detail::check_point(spec, t2, t1, s2, s1, i);
    const auto p = detail::ordered_triple(spec.model1, t1, t2);
    const auto q = detail::ordered_triple(spec.model2, s1, s2);
    return lemma2_closed(CrossKernelParams(p.a, p.b, p.c, q.a, q.b, q.c, spec.eps, spec.x[i], spec.k[i]));
}

/// E|L_eps|^2 = 2/(2 pi)^d (I1 + I2) with I1, I2 integrals over the ordered
/// domain {t1 < t2, s1 < s2}. Valid for any offset x.
inline MomentResult second_moment_general(const FieldSpec& spec, const QuadPlan& plan = {}) {
    spec.validate();
    detail::check_lemma_orders(spec);
    const unsigned jobs = resolve_jobs(plan.jobs);
    const TimeRegion reg{RegionKind::D_ORDERED, 2.0, spec.T};
    const double norm = 2.0 / std::pow(2.0 * std::numbers::pi, double(spec.d()));
    return detail::refine_until_converged(
        plan,
        [&](int b) {
            const auto n1 = detail::build_pairs(spec.model1, reg, spec.eps, plan.order, plan.sublevels, b);
            const auto n2 = detail::build_pairs(spec.model2, reg, spec.eps, plan.order, plan.sublevels, b);
            const auto sums = detail::general_sums(spec, n1, n2, jobs);
            MomentResult r;
            r.I1 = sums.I1;
            r.I2 = sums.I2;
            r.value = norm * (sums.I1 + sums.I2);
            r.nodes1 = n1.size();
            r.nodes2 = n2.size();
            return r;
        },
        "second_moment_general");
}

/// I1 alone restricted to a region (D_ORDERED or D_GAMMA); unnormalized.
inline MomentResult i1_over_region(const FieldSpec& spec, const TimeRegion& reg, const QuadPlan& plan = {}) {
    spec.validate();
    detail::check_lemma_orders(spec);
    if (reg.kind == RegionKind::FULL_SQUARE)
        throw PreconditionError("i1_over_region needs an ordered region (D_ORDERED or D_GAMMA)");
    if (reg.kind == RegionKind::D_GAMMA && !(reg.gamma > 1.0))
        throw PreconditionError("D_gamma requires gamma > 1", reg.gamma);
    const unsigned jobs = resolve_jobs(plan.jobs);
    return detail::refine_until_converged(
        plan,
        [&](int b) {
            const auto n1 = detail::build_pairs(spec.model1, reg, spec.eps, plan.order, plan.sublevels, b);
            const auto n2 = detail::build_pairs(spec.model2, reg, spec.eps, plan.order, plan.sublevels, b);
            MomentResult r;
            r.I1 = detail::general_sums(spec, n1, n2, jobs, false).I1;
            r.value = r.I1;
            r.nodes1 = n1.size();
            r.nodes2 = n2.size();
            return r;
        },
        "i1_over_region");
}

/// E|L_eps(T,0)|^2 over the full square [0,T]^4 via the symmetric closed form.
inline MomentResult second_moment_at_zero(const FieldSpec& spec, const QuadPlan& plan = {}) {
    spec.validate();
    detail::check_lemma_orders(spec);
    if (!spec.x_is_zero()) throw PreconditionError("second_moment_at_zero requires x = 0", spec.x_norm());
    const unsigned jobs = resolve_jobs(plan.jobs);
    const TimeRegion reg{RegionKind::FULL_SQUARE, 2.0, spec.T};
    const double norm = 1.0 / std::pow(2.0 * std::numbers::pi, double(spec.d()));
    return detail::refine_until_converged(
        plan,
        [&](int b) {
            const auto n1 = detail::build_pairs(spec.model1, reg, spec.eps, plan.order, plan.sublevels, b);
            const auto n2 = detail::build_pairs(spec.model2, reg, spec.eps, plan.order, plan.sublevels, b);
            MomentResult r;
            r.value = norm * detail::at_zero_sum(spec, n1, n2, jobs);
            r.nodes1 = n1.size();
            r.nodes2 = n2.size();
            return r;
        },
        "second_moment_at_zero");
}

/// Dispatches to the x = 0 fast path when possible.
inline MomentResult second_moment(const FieldSpec& spec, const QuadPlan& plan = {}) {
    return spec.x_is_zero() ? second_moment_at_zero(spec, plan) : second_moment_general(spec, plan);
}

/// One-dimensional p_v^{(k)}(x).
inline double heat_kernel_deriv_1d(double x, double v, int k) noexcept {
    const double rs = 1.0 / std::sqrt(v);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    return sign * detail::ipow(rs, k) * hermite_he(k, x * rs) * std::exp(-x * x / (2.0 * v)) * rs /
           std::sqrt(2.0 * std::numbers::pi);
}

/// E[L_eps^{(k)}(T,x)] = \int\int prod_i p^{(k_i)}_{var1(t)+var2(s)+eps}(x_i) dt ds.
inline MomentResult mean_L(const FieldSpec& spec, const QuadPlan& plan = {}) {
    spec.validate();
    return detail::refine_until_converged(
        plan,
        [&](int b) {
            const Rule1D rt = composite_rule(
                bisect_panels(graded_breaks(spec.T, detail::eps_scale(spec.model1, spec.eps), plan.sublevels), b),
                plan.order);
            const Rule1D rs = composite_rule(
                bisect_panels(graded_breaks(spec.T, detail::eps_scale(spec.model2, spec.eps), plan.sublevels), b),
                plan.order);
            std::vector<double> v2(rs.size());
            for (std::size_t j = 0; j < rs.size(); ++j) v2[j] = spec.model2.variance(rs.x[j]);
            std::vector<double> rows(rt.size());
            for (std::size_t i = 0; i < rt.size(); ++i) {
                const double v1 = spec.model1.variance(rt.x[i]);
                double acc = 0.0;
                for (std::size_t j = 0; j < rs.size(); ++j) {
                    const double v = v1 + v2[j] + spec.eps;
                    double prod = 1.0;
                    for (std::size_t c = 0; c < spec.d(); ++c) prod *= heat_kernel_deriv_1d(spec.x[c], v, spec.k[c]);
                    acc += rs.w[j] * prod;
                }
                rows[i] = rt.w[i] * acc;
            }
            MomentResult r;
            r.value = pairwise_sum(rows);
            r.nodes1 = rt.size();
            r.nodes2 = rs.size();
            return r;
        },
        "mean_L");
}

}  // namespace gausslt
