#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gausslt/errors.hpp"
#include "gausslt/field.hpp"
#include "gausslt/moments.hpp"
#include "gausslt/parallel.hpp"
#include "gausslt/pathsim.hpp"

namespace gausslt {

inline constexpr double kCriticalTol = 1e-12;
inline constexpr double kNearCriticalBand = 1e-6;

/// (H1, H2, d, |k|) with the criticality index
///   theta = H1 H2 / (H1 + H2) * (2|k| + d).
struct RateSpec {
    double H1 = 0.5;
    double H2 = 0.5;
    int d = 1;
    int kAbs = 0;

    RateSpec() = default;
    RateSpec(double h1, double h2, int d_, int kAbs_) : H1(h1), H2(h2), d(d_), kAbs(kAbs_) {
        detail::require(H1 > 0.0 && H1 < 1.0, "H1 must lie in (0,1)", H1);
        detail::require(H2 > 0.0 && H2 < 1.0, "H2 must lie in (0,1)", H2);
        detail::require(d >= 1, "d must be >= 1", d);
        detail::require(kAbs >= 0, "|k| must be >= 0", kAbs);
    }

    static RateSpec from(const FieldSpec& s) { return RateSpec(s.model1.H(), s.model2.H(), int(s.d()), s.k.abs()); }

    double theta() const noexcept { return H1 * H2 / (H1 + H2) * (2.0 * kAbs + d); }
    bool critical() const noexcept { return std::abs(theta() - 1.0) <= kCriticalTol; }
    /// In (1, 1 + 1e-6): handled as supercritical, but the two branches of h differ.
    bool near_critical() const noexcept {
        const double t = theta();
        return t > 1.0 + kCriticalTol && t < 1.0 + kNearCriticalBand;
    }
    /// Exponent of the supercritical power law: (H1+H2)/(2 H1 H2) - d/2 - |k|.
    double exponent() const noexcept { return (H1 + H2) / (2.0 * H1 * H2) - 0.5 * d - kAbs; }
};

/// The derivative exists in L^2 iff theta < 1 (the boundary counts as divergent).
inline bool exists_in_L2(const RateSpec& r) { return r.theta() < 1.0 - kCriticalTol; }

inline double rate_h(const RateSpec& r, double eps) {
    detail::require(eps > 0.0, "rate_h requires eps > 0", eps);
    if (exists_in_L2(r)) throw PreconditionError("subcritical: L^(k) exists, rate undefined", r.theta());
    if (r.critical()) return std::log1p(1.0 / std::sqrt(eps));
    return std::pow(eps, r.exponent());
}

enum class MomentSource { QUAD, MC };

inline const char* to_string(MomentSource s) { return s == MomentSource::QUAD ? "QUAD" : "MC"; }

struct SweepRecord {
    double eps = 0.0;
    double moment = 0.0;
    double h = 0.0;
    double ratio = 0.0;
    MomentSource source = MomentSource::QUAD;
    double stderrMoment = 0.0;   // MC only
};

struct MCParams {
    std::size_t n = 256;
    std::size_t M = 2000;
    std::uint64_t seed = 0x5EED;
};

struct SweepOptions {
    QuadPlan quad{};
    std::optional<MCParams> mc;
    double minQuadEps = 1e-4;   // smallest eps accepted for QUAD unless overridden
    unsigned jobs = 0;
};

/// Second moment and ratio to h(eps) per eps, in epsList order. The template's
/// eps field is ignored.
inline std::vector<SweepRecord> sweep(const FieldSpec& tmpl, const std::vector<double>& epsList, MomentSource source,
                                      const SweepOptions& opt = {}) {
    tmpl.validate();
    if (epsList.empty()) throw PreconditionError("sweep needs at least one eps");
    for (std::size_t i = 0; i < epsList.size(); ++i) {
        detail::require(epsList[i] > 0.0, "sweep: eps must be > 0", epsList[i]);
        if (i > 0 && !(epsList[i] < epsList[i - 1]))
            throw PreconditionError("sweep: eps list must be strictly decreasing", epsList[i]);
    }
    if (source == MomentSource::QUAD && epsList.back() < opt.minQuadEps)
        throw PreconditionError("sweep: eps below the QUAD floor " + std::to_string(opt.minQuadEps) +
                                    " (raise it explicitly to go lower)",
                                epsList.back());
    if (source == MomentSource::MC && !opt.mc) throw PreconditionError("sweep: MC source requires MC parameters");
    const RateSpec rs = RateSpec::from(tmpl);
    if (rs.near_critical())
        std::clog << "warning: theta = " << rs.theta() << " is within 1e-6 of 1; using the power-law rate\n";

    std::vector<SweepRecord> out(epsList.size());
    for (std::size_t i = 0; i < epsList.size(); ++i) {
        FieldSpec s = tmpl;
        s.eps = epsList[i];
        SweepRecord rec;
        rec.eps = s.eps;
        rec.source = source;
        rec.h = rate_h(rs, s.eps);
        if (source == MomentSource::QUAD) {
            QuadPlan plan = opt.quad;
            if (plan.jobs == 0) plan.jobs = opt.jobs;
            rec.moment = second_moment(s, plan).value;
        } else {
            MCOptions mo;
            mo.jobs = opt.jobs;
            const MCEstimate e = mc_moments(s, opt.mc->n, opt.mc->M, opt.mc->seed, mo);
            rec.moment = e.secondMoment;
            rec.stderrMoment = e.stderrSecondMoment;
        }
        rec.ratio = rec.moment / rec.h;
        out[i] = rec;
    }
    return out;
}

namespace detail {

struct LineFit {
    double slope;
    double intercept;
};

inline LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = double(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 1e-300)) throw PreconditionError("degenerate design: all abscissae coincide");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

}  // namespace detail

/// Least-squares slope of log(moment) against log(eps).
inline double fit_slope(const std::vector<SweepRecord>& records) {
    if (records.size() < 4) throw PreconditionError("fit_slope needs at least 4 records", double(records.size()));
    std::vector<double> lx, ly;
    for (const auto& r : records) {
        if (r.source != MomentSource::QUAD) throw PreconditionError("fit_slope expects QUAD records");
        if (!(r.eps > 0.0 && r.moment > 0.0))
            throw PreconditionError("fit_slope needs positive eps and moments", r.moment);
        lx.push_back(std::log(r.eps));
        ly.push_back(std::log(r.moment));
    }
    return detail::least_squares(lx, ly).slope;
}

struct XShapeRow {
    double xNorm;
    double moment;
};

struct XShapeReport {
    std::vector<XShapeRow> rows;
    double logC1 = 0.0;   // intercept of log(moment) vs |x|^2
    double c2 = 0.0;      // minus the slope
    bool monotone = true; // non-increasing in |x|
};

/// Moments with x moved along the first axis; fits log(moment) = log c1 - c2 |x|^2.
inline XShapeReport x_shape_probe(const FieldSpec& tmpl, const std::vector<double>& xMagnitudes,
                                  const QuadPlan& plan = {}) {
    tmpl.validate();
    if (xMagnitudes.size() < 2) throw PreconditionError("x_shape_probe needs at least two |x| values");
    XShapeReport rep;
    std::vector<double> x2, lm;
    for (double r : xMagnitudes) {
        detail::require(r >= 0.0, "x magnitudes must be >= 0", r);
        FieldSpec s = tmpl;
        std::fill(s.x.begin(), s.x.end(), 0.0);
        s.x[0] = r;
        const double m = second_moment(s, plan).value;
        rep.rows.push_back({r, m});
        if (m > 0.0) {
            x2.push_back(r * r);
            lm.push_back(std::log(m));
        }
    }
    auto sorted = rep.rows;
    std::sort(sorted.begin(), sorted.end(), [](const XShapeRow& a, const XShapeRow& b) { return a.xNorm < b.xNorm; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].xNorm > sorted[i - 1].xNorm && sorted[i].moment > sorted[i - 1].moment) rep.monotone = false;
    if (tmpl.k.abs() == 0 && !rep.monotone)
        throw InternalError("x_shape_probe: moment increased with |x| at k = 0");
    if (x2.size() >= 2) {
        const auto fit = detail::least_squares(x2, lm);
        rep.logC1 = fit.intercept;
        rep.c2 = -fit.slope;
    }
    return rep;
}

}  // namespace gausslt
