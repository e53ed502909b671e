#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gausslt/covariance.hpp"
#include "gausslt/errors.hpp"
#include "gausslt/field.hpp"
#include "gausslt/heat_kernel.hpp"
#include "gausslt/parallel.hpp"
#include "gausslt/quadrature.hpp"

namespace gausslt {

/// d i.i.d. scalar paths sampled at t_i = i T / n, i = 1..n (X_0 = 0 implied).
struct PathGrid {
    std::vector<double> times;
    Eigen::MatrixXd values;   // n x d
    CovarianceModel model;
    std::uint64_t seed = 0;
    double T = 0.0;

    std::size_t n() const noexcept { return times.size(); }
    std::size_t d() const noexcept { return std::size_t(values.cols()); }
};

inline std::vector<double> path_times(double T, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = T * double(i + 1) / double(n);
    return t;
}

/// Lower Cholesky factor of the grid covariance. Retries with diagonal jitter
/// 1e-12, 1e-11, 1e-10 times the largest diagonal entry.
inline Eigen::MatrixXd covariance_factor(const CovarianceModel& m, double T, std::size_t n) {
    detail::require(T > 0.0, "sample_path: T must be > 0", T);
    detail::require(n >= 2, "sample_path: grid needs n >= 2", double(n));
    const auto t = path_times(T, n);
    Eigen::MatrixXd C(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) C(i, j) = C(j, i) = m.eval(t[i], t[j]);
    const double maxDiag = C.diagonal().maxCoeff();
    double jitter = 0.0;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        Eigen::MatrixXd Cj = C;
        Cj.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(Cj);
        if (llt.info() == Eigen::Success) return llt.matrixL();
        jitter = (attempt == 0) ? 1e-12 * maxDiag : jitter * 10.0;
    }
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(C, Eigen::EigenvaluesOnly).eigenvalues()(0);
    throw PreconditionError("covariance factorization failed after jitter; smallest eigenvalue " +
                                std::to_string(lmin),
                            lmin);
}

/// Process-wide cache of factors keyed by (model, T, n).
class FactorCache {
public:
    std::shared_ptr<const Eigen::MatrixXd> get(const CovarianceModel& m, double T, std::size_t n) {
        const Key key{int(m.kind()), m.H(), m.H0(), m.K0(), T, n};
        {
            std::lock_guard lock(mu_);
            if (auto it = map_.find(key); it != map_.end()) return it->second;
        }
        auto f = std::make_shared<const Eigen::MatrixXd>(covariance_factor(m, T, n));
        std::lock_guard lock(mu_);
        return map_.emplace(key, std::move(f)).first->second;
    }

    static FactorCache& global() {
        static FactorCache c;
        return c;
    }

private:
    using Key = std::tuple<int, double, double, double, double, std::size_t>;
    std::mutex mu_;
    std::map<Key, std::shared_ptr<const Eigen::MatrixXd>> map_;
};

template <class Rng>
PathGrid sample_path_with(const CovarianceModel& m, double T, std::size_t n, std::size_t d, Rng& rng,
                          std::uint64_t seed) {
    const auto L = FactorCache::global().get(m, T, n);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd Z(n, d);
    for (std::size_t c = 0; c < d; ++c)
        for (std::size_t i = 0; i < n; ++i) Z(i, c) = normal(rng);
    PathGrid g{path_times(T, n), Eigen::MatrixXd(n, d), m, seed, T};
    g.values.noalias() = L->template triangularView<Eigen::Lower>() * Z;
    return g;
}

/// Exact-law sample of d independent scalar paths; deterministic in `seed`.
inline PathGrid sample_path(const CovarianceModel& m, double T, std::size_t n, std::size_t d, std::uint64_t seed) {
    detail::require(d >= 1, "sample_path: d must be >= 1", double(d));
    std::mt19937_64 rng(seed);
    return sample_path_with(m, T, n, d, rng, seed);
}

enum class TimeRule { Trapezoid, Midpoint };

/// Riemann sum of p_eps^{(k)}(X_t - X~_s + x) over the (t, s) grid including
/// the origin. Trapezoid uses all n+1 points per axis; Midpoint uses cells of
/// width 2T/n centred on the odd grid points (n must be even).
inline double estimate_L(const FieldSpec& spec, const PathGrid& p1, const PathGrid& p2,
                         TimeRule rule = TimeRule::Trapezoid) {
    spec.validate();
    if (p1.n() != p2.n() || p1.T != p2.T)
        throw PreconditionError("estimate_L: path grids differ in size or horizon");
    if (p1.d() != spec.d() || p2.d() != spec.d())
        throw PreconditionError("estimate_L: path dimension does not match the multi-index");
    const std::size_t n = p1.n(), d = spec.d();
    const double h = p1.T / double(n);

    std::vector<std::size_t> idx;   // indices into 0..n (0 = origin)
    std::vector<double> w;
    if (rule == TimeRule::Trapezoid) {
        for (std::size_t i = 0; i <= n; ++i) {
            idx.push_back(i);
            w.push_back((i == 0 || i == n) ? 0.5 * h : h);
        }
    } else {
        if (n % 2 != 0) throw PreconditionError("midpoint rule needs an even grid size", double(n));
        for (std::size_t i = 1; i < n; i += 2) {
            idx.push_back(i);
            w.push_back(2.0 * h);
        }
    }
    const std::size_t m = idx.size();
    // value at grid index i (origin is 0), shifted by x for the first process
    Eigen::MatrixXd A(m, d), B(m, d);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t c = 0; c < d; ++c) {
            A(a, c) = (idx[a] == 0 ? 0.0 : p1.values(idx[a] - 1, c)) + spec.x[c];
            B(a, c) = (idx[a] == 0 ? 0.0 : p2.values(idx[a] - 1, c));
        }

    const double eps = spec.eps, rs = 1.0 / std::sqrt(eps);
    const int order = spec.k.abs();
    const double norm = ((order % 2 == 0) ? 1.0 : -1.0) * std::pow(rs, order) *
                        std::pow(2.0 * std::numbers::pi * eps, -0.5 * double(d));
    bool anyDeriv = order > 0;

    std::vector<double> rows(m);
    for (std::size_t a = 0; a < m; ++a) {
        double acc = 0.0;
        for (std::size_t b = 0; b < m; ++b) {
            double r2 = 0.0, herm = 1.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double z = A(a, c) - B(b, c);
                r2 += z * z;
                if (anyDeriv && spec.k[c] > 0) herm *= hermite_he(spec.k[c], z * rs);
            }
            acc += w[b] * herm * std::exp(-r2 / (2.0 * eps));
        }
        rows[a] = w[a] * acc;
    }
    return norm * pairwise_sum(rows);
}

struct MCEstimate {
    double mean = 0.0;
    double variance = 0.0;
    double secondMoment = 0.0;
    double stderrSecondMoment = 0.0;
    double stderrMean = 0.0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
};

struct MCOptions {
    TimeRule rule = TimeRule::Trapezoid;
    unsigned jobs = 0;
};

/// True when eps is below (T/n)^{2 min(H1,H2)}: the kernel width is then
/// comparable to the path's grid-scale oscillation and the Riemann sum is biased.
inline bool grid_bias_regime(const FieldSpec& spec, std::size_t n) {
    const double hmin = std::min(spec.model1.H(), spec.model2.H());
    return spec.eps < std::pow(spec.T / double(n), 2.0 * hmin);
}

/// Per-replicate L values; replicate r draws both paths from an engine seeded
/// with seed ^ r (first process first).
inline std::vector<double> mc_samples(const FieldSpec& spec, std::size_t n, std::size_t M, std::uint64_t seed,
                                      const MCOptions& opt = {}) {
    spec.validate();
    detail::require(M >= 2, "mc_moments needs at least 2 replicates", double(M));
    detail::require(n >= 2, "mc_moments needs n >= 2", double(n));
    // warm the factor cache before fanning out
    FactorCache::global().get(spec.model1, spec.T, n);
    FactorCache::global().get(spec.model2, spec.T, n);
    std::vector<double> L(M);
    parallel_for(M, resolve_jobs(opt.jobs), [&](std::size_t r) {
        const std::uint64_t s = seed ^ std::uint64_t(r);
        std::mt19937_64 rng(s);
        const PathGrid p1 = sample_path_with(spec.model1, spec.T, n, spec.d(), rng, s);
        const PathGrid p2 = sample_path_with(spec.model2, spec.T, n, spec.d(), rng, s);
        L[r] = estimate_L(spec, p1, p2, opt.rule);
    });
    return L;
}

inline MCEstimate summarize_samples(const std::vector<double>& L, std::uint64_t seed) {
    const std::size_t M = L.size();
    std::vector<double> sq(M);
    for (std::size_t i = 0; i < M; ++i) sq[i] = L[i] * L[i];
    const double mean = pairwise_sum(L) / double(M);
    const double m2 = pairwise_sum(sq) / double(M);
    std::vector<double> dev(M), dev2(M);
    for (std::size_t i = 0; i < M; ++i) {
        dev[i] = (L[i] - mean) * (L[i] - mean);
        dev2[i] = (sq[i] - m2) * (sq[i] - m2);
    }
    MCEstimate e;
    e.mean = mean;
    e.variance = pairwise_sum(dev) / double(M - 1);
    e.secondMoment = m2;
    e.stderrSecondMoment = std::sqrt(pairwise_sum(dev2) / double(M - 1) / double(M));
    e.stderrMean = std::sqrt(e.variance / double(M));
    e.replicates = M;
    e.seed = seed;
    return e;
}

inline MCEstimate mc_moments(const FieldSpec& spec, std::size_t n, std::size_t M, std::uint64_t seed,
                             const MCOptions& opt = {}) {
    return summarize_samples(mc_samples(spec, n, M, seed, opt), seed);
}

}  // namespace gausslt
