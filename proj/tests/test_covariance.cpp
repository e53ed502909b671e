#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "gausslt/covariance.hpp"
#include "gausslt/pathsim.hpp"

using namespace gausslt;

namespace {

std::vector<CovarianceModel> sample_models() {
    return {CovarianceModel::fbm(0.3),        CovarianceModel::fbm(0.5),       CovarianceModel::fbm(0.8),
            CovarianceModel::bifbm(0.7, 0.5), CovarianceModel::bifbm(0.6, 0.8), CovarianceModel::subfbm(0.3),
            CovarianceModel::subfbm(0.5),     CovarianceModel::subfbm(0.75)};
}

}  // namespace

TEST(Covariance, FbmUnitVariance) { EXPECT_DOUBLE_EQ(CovarianceModel::fbm(0.5)(1.0, 1.0), 1.0); }

TEST(Covariance, BifbmWithUnitK0IsFbm) {
    const auto b = CovarianceModel::bifbm(0.5, 1.0);
    const auto f = CovarianceModel::fbm(0.5);
    EXPECT_NEAR(b(0.3, 0.7), f(0.3, 0.7), 1e-15);
    EXPECT_NEAR(b(1.0, 2.0), f(1.0, 2.0), 1e-15);
    EXPECT_DOUBLE_EQ(b.H(), 0.5);
}

TEST(Covariance, BifbmK0ReductionRandom) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 3.0), UH(0.05, 0.95);
    for (int i = 0; i < 1000; ++i) {
        const double H = UH(rng), s = U(rng), t = U(rng);
        const double want = CovarianceModel::fbm(H)(s, t);
        EXPECT_NEAR(CovarianceModel::bifbm(H, 1.0)(s, t), want, 4e-15 * std::max(1.0, std::abs(want)));
    }
}

TEST(Covariance, SubfbmVarianceAtHalf) {
    const auto m = CovarianceModel::subfbm(0.5);
    EXPECT_NEAR(m(1.0, 1.0), 1.0, 1e-15);
    // (2 - 2^{2H-1}) t^{2H}
    const auto m3 = CovarianceModel::subfbm(0.3);
    EXPECT_NEAR(m3(2.0, 2.0), (2.0 - std::pow(2.0, -0.4)) * std::pow(2.0, 0.6), 1e-14);
}

TEST(Covariance, BifbmEffectiveIndex) {
    const auto m = CovarianceModel::bifbm(0.7, 0.5);
    EXPECT_DOUBLE_EQ(m.H(), 0.35);
    EXPECT_DOUBLE_EQ(m.H0(), 0.7);
    EXPECT_DOUBLE_EQ(m.K0(), 0.5);
    EXPECT_EQ(m.kind(), CovKind::BIFBM);
    // variance 2^{-K0} (2 t^{2H0})^{K0} = t^{2 H0 K0}
    EXPECT_NEAR(m(1.7, 1.7), std::pow(1.7, 0.7), 1e-14);
}

TEST(Covariance, ZeroAtOrigin) {
    for (const auto& m : sample_models()) {
        EXPECT_EQ(m(0.0, 0.0), 0.0);
        EXPECT_EQ(m(0.0, 0.9), 0.0);
    }
}

TEST(Covariance, RejectsBadParameters) {
    EXPECT_THROW(CovarianceModel::fbm(0.0), PreconditionError);
    EXPECT_THROW(CovarianceModel::fbm(1.0), PreconditionError);
    EXPECT_THROW(CovarianceModel::subfbm(1.2), PreconditionError);
    EXPECT_THROW(CovarianceModel::bifbm(0.5, 0.0), PreconditionError);
    EXPECT_THROW(CovarianceModel::bifbm(0.5, 1.1), PreconditionError);
    EXPECT_THROW(CovarianceModel::bifbm(1.0, 0.5), PreconditionError);
    EXPECT_NO_THROW(CovarianceModel::bifbm(0.5, 1.0));
}

TEST(Covariance, RejectsNegativeTimes) {
    const auto m = CovarianceModel::fbm(0.5);
    EXPECT_THROW(m(-0.1, 1.0), PreconditionError);
    EXPECT_THROW(m(1.0, -1e-9), PreconditionError);
}

TEST(Covariance, Symmetric) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 2.0);
    for (const auto& m : sample_models())
        for (int i = 0; i < 200; ++i) {
            const double s = U(rng), t = U(rng);
            EXPECT_EQ(m(s, t), m(t, s));
        }
}

TEST(Covariance, PositiveSemidefiniteOnRandomGrids) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 2.0);
    std::uniform_int_distribution<int> N(2, 32);
    for (const auto& m : sample_models())
        for (int rep = 0; rep < 20; ++rep) {
            const int n = N(rng);
            std::vector<double> t(n);
            for (auto& v : t) v = U(rng);
            Eigen::MatrixXd C(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) C(i, j) = m(t[i], t[j]);
            const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(C).eigenvalues()(0);
            EXPECT_GE(lmin, -1e-10 * C.diagonal().maxCoeff()) << to_string(m.kind()) << " H=" << m.H();
        }
}

TEST(Covariance, NonnegativeOnRandomGrids) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 5.0);
    for (const auto& m : sample_models())
        for (int i = 0; i < 2000; ++i) EXPECT_GE(m(U(rng), U(rng)), -1e-12);
}

TEST(IncrementCross, FbmHalfIndependentIncrements) {
    EXPECT_NEAR(increment_cross(CovarianceModel::fbm(0.5), 1.0, 2.0), 0.0, 1e-15);
}

TEST(IncrementCross, FbmThreeQuarters) {
    EXPECT_NEAR(increment_cross(CovarianceModel::fbm(0.75), 1.0, 2.0), 0.5 * (std::pow(2.0, 1.5) - 2.0), 1e-14);
    EXPECT_NEAR(increment_cross(CovarianceModel::fbm(0.75), 1.0, 2.0), 0.41421356, 1e-8);
}

TEST(IncrementCross, SubfbmMatchesCovarianceDifference) {
    const auto m = CovarianceModel::subfbm(0.5);
    EXPECT_NEAR(increment_cross(m, 1.0, 2.0), m(1.0, 2.0) - m(1.0, 1.0), 1e-15);
}

TEST(IncrementCross, MatchesSampledPaths) {
    // t = 0.5, 1.0 sit on the grid j/16
    for (const auto& m : {CovarianceModel::fbm(0.75), CovarianceModel::subfbm(0.5), CovarianceModel::bifbm(0.7, 0.5)}) {
        const std::size_t n = 16, reps = 20000;
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
            const auto p = sample_path(m, 1.0, n, 1, 1000 + r);
            const double xs = p.values(7, 0), xt = p.values(15, 0);
            const double v = (xt - xs) * xs;
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / reps, se = std::sqrt((sum2 / reps - mean * mean) / reps);
        EXPECT_NEAR(mean, increment_cross(m, 0.5, 1.0), 4.0 * se) << to_string(m.kind());
    }
}

TEST(IncrementCross, RejectsUnorderedTimes) {
    const auto m = CovarianceModel::fbm(0.5);
    EXPECT_THROW(increment_cross(m, 1.0, 1.0), PreconditionError);
    EXPECT_THROW(increment_cross(m, 2.0, 1.0), PreconditionError);
}

TEST(ProbeP1, FbmStationaryIncrements) {
    for (double H : {0.2, 0.5, 0.8}) {
        const auto r = probe_p1(CovarianceModel::fbm(H), 2.0, 50);
        EXPECT_NEAR(r.kappa1, 1.0, 1e-12);
        EXPECT_NEAR(r.kappa2, 1.0, 1e-12);
        EXPECT_EQ(r.gridSize, 50u);
    }
}

TEST(ProbeP1, SubfbmBounded) {
    const auto r = probe_p1(CovarianceModel::subfbm(0.5), 1.0, 64);
    EXPECT_GT(r.kappa1, 0.0);
    EXPECT_LE(r.kappa1, r.kappa2);
    EXPECT_TRUE(std::isfinite(r.kappa2));
    // sub-fBm bounds (2 - 2^{2H-1}) and 1 at H = 1/2 collapse to 1
    EXPECT_NEAR(r.kappa1, 1.0, 1e-12);
}

TEST(ProbeP1, BifbmBounded) {
    const auto r = probe_p1(CovarianceModel::bifbm(0.6, 0.8), 1.0, 64);
    EXPECT_GT(r.kappa1, 0.0);
    EXPECT_LE(r.kappa1, r.kappa2);
    // known two-sided bounds 2^{-K0} <= kappa <= 2^{1-K0}
    EXPECT_GE(r.kappa1, std::exp2(-0.8) - 1e-12);
    EXPECT_LE(r.kappa2, std::exp2(0.2) + 1e-12);
}

TEST(ProbeP1, RejectsBadArguments) {
    EXPECT_THROW(probe_p1(CovarianceModel::fbm(0.5), 0.0, 10), PreconditionError);
    EXPECT_THROW(probe_p1(CovarianceModel::fbm(0.5), 1.0, 1), PreconditionError);
}

TEST(ProbeP2, FbmHalfIsZero) {
    const auto r = probe_p2(CovarianceModel::fbm(0.5), 1.0, {2, 4, 8});
    for (double b : r.betas) EXPECT_NEAR(b, 0.0, 1e-12);
}

TEST(ProbeP2, SubfbmDecays) {
    // self-similar, so beta(gamma) is the sup of the ratio over relative increments u <= 1/gamma
    const double H = 0.3;
    const auto m = CovarianceModel::subfbm(H);
    auto exact = [&](double u) {
        return std::abs(m.eval(1.0, 1.0 + u) - m.eval(1.0, 1.0)) /
               std::sqrt(m.increment_variance(1.0, 1.0 + u) * m.variance(1.0));
    };
    auto sup = [&](double cap) {
        double best = 0.0;
        for (int j = 1; j <= 20000; ++j) best = std::max(best, exact(cap * j / 20000.0));
        return best;
    };
    const std::vector<double> g = {2, 4, 8, 16, 32, 64, 1000};
    const auto r = probe_p2(m, 1.0, g, 8192);
    ASSERT_EQ(r.betas.size(), g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_GE(r.betas[i], 0.0);
        EXPECT_LE(r.betas[i], 1.0);
        const double want = sup(1.0 / g[i]);
        EXPECT_LE(r.betas[i], want * (1 + 1e-6));
        EXPECT_GE(r.betas[i], 0.95 * want);
        if (i) {
            EXPECT_LE(r.betas[i], r.betas[i - 1]);
        }
    }
    EXPECT_LT(r.betas.back(), r.betas.front() / 2);
}

TEST(ProbeP2, BifbmDecays) {
    const auto r = probe_p2(CovarianceModel::bifbm(0.7, 0.5), 1.0, {2, 4, 8, 16, 32, 64});
    for (std::size_t i = 1; i < r.betas.size(); ++i) EXPECT_LE(r.betas[i], r.betas[i - 1]);
    EXPECT_LT(r.betas.back(), r.betas.front() / 2);
}

TEST(ProbeP2, RejectsGammaNotAboveOne) {
    EXPECT_THROW(probe_p2(CovarianceModel::fbm(0.3), 1.0, {1.0}), PreconditionError);
    EXPECT_THROW(probe_p2(CovarianceModel::fbm(0.3), 1.0, {0.5, 2.0}), PreconditionError);
}

TEST(ProbeP2, EmptyPairSetNamesGamma) {
    try {
        probe_p2(CovarianceModel::subfbm(0.3), 1.0, {1e9}, 16);
        FAIL() << "expected an error";
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("1e+09"), std::string::npos) << e.what();
    }
}
