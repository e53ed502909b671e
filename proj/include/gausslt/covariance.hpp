#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gausslt/errors.hpp"

namespace gausslt {

enum class CovKind { FBM, BIFBM, SUBFBM };

inline const char* to_string(CovKind k) {
    switch (k) {
        case CovKind::FBM: return "fbm";
        case CovKind::BIFBM: return "bifbm";
        case CovKind::SUBFBM: return "subfbm";
    }
    return "?";
}

/// Covariance of one scalar component of a centered Gaussian process.
/// For bi-fBm the effective self-similarity index is H = H0*K0.
class CovarianceModel {
public:
    static CovarianceModel fbm(double H) {
        check_unit("H", H);
        return CovarianceModel(CovKind::FBM, H, H, 1.0);
    }
    static CovarianceModel bifbm(double H0, double K0) {
        check_unit("H0", H0);
        if (!(K0 > 0.0 && K0 <= 1.0))
            throw PreconditionError("K0 must lie in (0,1], got " + std::to_string(K0), K0);
        return CovarianceModel(CovKind::BIFBM, H0 * K0, H0, K0);
    }
    static CovarianceModel subfbm(double H) {
        check_unit("H", H);
        return CovarianceModel(CovKind::SUBFBM, H, H, 1.0);
    }

    CovKind kind() const noexcept { return kind_; }
    double H() const noexcept { return H_; }
    double H0() const noexcept { return H0_; }
    double K0() const noexcept { return K0_; }

    double operator()(double s, double t) const {
        if (s < 0.0 || t < 0.0)
            throw PreconditionError("covariance requires nonnegative times", std::min(s, t));
        return eval(s, t);
    }

    /// Unchecked evaluation for hot loops; times must already be >= 0.
    double eval(double s, double t) const noexcept {
        switch (kind_) {
            case CovKind::FBM:
                return 0.5 * (pw(t, 2 * H_) + pw(s, 2 * H_) - pw(std::abs(t - s), 2 * H_));
            case CovKind::BIFBM:
                return std::exp2(-K0_) * (std::pow(pw(t, 2 * H0_) + pw(s, 2 * H0_), K0_) -
                                          pw(std::abs(t - s), 2 * H_));
            case CovKind::SUBFBM:
                return pw(t, 2 * H_) + pw(s, 2 * H_) -
                       0.5 * (pw(t + s, 2 * H_) + pw(std::abs(t - s), 2 * H_));
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    double variance(double t) const noexcept { return eval(t, t); }

    /// E[(X_t - X_s)^2].
    double increment_variance(double s, double t) const noexcept {
        if (kind_ == CovKind::FBM) return pw(std::abs(t - s), 2 * H_);
        return std::max(0.0, eval(t, t) - 2.0 * eval(s, t) + eval(s, s));
    }

    friend bool operator==(const CovarianceModel&, const CovarianceModel&) = default;

private:
    CovarianceModel(CovKind k, double H, double H0, double K0) : kind_(k), H_(H), H0_(H0), K0_(K0) {}

    static void check_unit(const char* name, double v) {
        if (!(v > 0.0 && v < 1.0))
            throw PreconditionError(std::string(name) + " must lie in (0,1), got " + std::to_string(v), v);
    }
    // 0^p = 0 for p > 0; avoids pow(0, p) edge cases on some libms.
    static double pw(double x, double p) noexcept { return x > 0.0 ? std::pow(x, p) : 0.0; }

    CovKind kind_;
    double H_;
    double H0_;
    double K0_;
};

/// E[(X_t - X_s) X_s] for 0 <= s < t.
inline double increment_cross(const CovarianceModel& m, double s, double t) {
    if (s < 0.0) throw PreconditionError("increment_cross requires s >= 0", s);
    if (!(s < t)) throw PreconditionError("increment_cross requires s < t", t - s);
    return m.eval(s, t) - m.eval(s, s);
}

struct P1Report {
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    double T = 0.0;
    std::size_t gridSize = 0;
};

/// Min/max of E[(X_t-X_s)^2]/(t-s)^{2H} over all pairs of the grid {jT/n : j < n}.
inline P1Report probe_p1(const CovarianceModel& m, double T, std::size_t n) {
    detail::require(T > 0.0, "probe_p1: T must be > 0", T);
    detail::require(n >= 2, "probe_p1: grid needs at least 2 points", double(n));
    P1Report r{std::numeric_limits<double>::infinity(), 0.0, T, n};
    const double h = T / double(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = h * double(i), t = h * double(j);
            const double ratio = m.increment_variance(s, t) / std::pow(t - s, 2 * m.H());
            r.kappa1 = std::min(r.kappa1, ratio);
            r.kappa2 = std::max(r.kappa2, ratio);
        }
    }
    return r;
}

struct P2Report {
    std::vector<double> gammas;
    std::vector<double> betas;
    double T = 0.0;
    std::size_t gridSize = 0;
};

/// Empirical beta(gamma): sup of |E[(X_t-X_s)X_s]| / (sd(X_t-X_s) sd(X_s)) over
/// pairs s < t of a log-spaced grid on [T*1e-3, T) with (t-s)/s <= 1/gamma.
inline P2Report probe_p2(const CovarianceModel& m, double T, std::vector<double> gammas,
                         std::size_t n = 2048) {
    detail::require(T > 0.0, "probe_p2: T must be > 0", T);
    detail::require(n >= 2, "probe_p2: grid needs at least 2 points", double(n));
    for (double g : gammas) detail::require(g > 1.0, "probe_p2: every gamma must be > 1", g);

    std::vector<double> times(n), sd(n);
    for (std::size_t j = 0; j < n; ++j) {
        times[j] = T * std::pow(10.0, -3.0 * (1.0 - double(j) / double(n)));
        sd[j] = std::sqrt(m.variance(times[j]));
    }

    P2Report rep{gammas, {}, T, n};
    for (double g : gammas) {
        double beta = 0.0;
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = times[i];
            for (std::size_t j = i + 1; j < n && (times[j] - s) / s <= 1.0 / g; ++j) {
                const double t = times[j];
                const double denom = std::sqrt(m.increment_variance(s, t)) * sd[i];
                if (!(denom > 0.0)) continue;
                beta = std::max(beta, std::abs(m.eval(s, t) - m.eval(s, s)) / denom);
                any = true;
            }
        }
        if (!any)
        {
            std::ostringstream msg;
            msg << "probe_p2: no grid pair with (t-s)/s <= 1/gamma for gamma = " << g << "; increase the grid size";
            throw PreconditionError(msg.str(), g);
        }
        rep.betas.push_back(beta);
    }
    return rep;
}

}  // namespace gausslt
