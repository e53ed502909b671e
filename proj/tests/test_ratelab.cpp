#include <cmath>

#include <gtest/gtest.h>

#include "gausslt/ratelab.hpp"

using namespace gausslt;

namespace {

SweepRecord synthetic(double eps, double moment) {
    SweepRecord r;
    r.eps = eps;
    r.moment = moment;
    return r;
}

FieldSpec spec(std::vector<int> k) {
    FieldSpec s;
    s.k = MultiIndex(k);
    s.x.assign(k.size(), 0.0);
    return s;
}

}  // namespace

TEST(RateSpec, Theta) {
    EXPECT_DOUBLE_EQ(RateSpec(0.5, 0.5, 2, 1).theta(), 1.0);
    EXPECT_DOUBLE_EQ(RateSpec(0.5, 0.5, 3, 1).theta(), 1.25);
    EXPECT_DOUBLE_EQ(RateSpec(0.5, 0.5, 1, 0).theta(), 0.25);
    EXPECT_TRUE(RateSpec(0.5, 0.5, 2, 1).critical());
    EXPECT_FALSE(RateSpec(0.5, 0.5, 3, 1).critical());
}

TEST(RateSpec, FromFieldSpec) {
    FieldSpec s = spec({1, 0, 2});
    s.model1 = CovarianceModel::bifbm(0.7, 0.5);
    const auto r = RateSpec::from(s);
    EXPECT_DOUBLE_EQ(r.H1, 0.35);
    EXPECT_EQ(r.d, 3);
    EXPECT_EQ(r.kAbs, 3);
}

TEST(RateSpec, RejectsOutOfRange) {
    EXPECT_THROW(RateSpec(1.0, 0.5, 1, 0), PreconditionError);
    EXPECT_THROW(RateSpec(0.5, 0.5, 0, 0), PreconditionError);
    EXPECT_THROW(RateSpec(0.5, 0.5, 1, -1), PreconditionError);
}

TEST(RateH, CriticalBranch) {
    const RateSpec r(0.5, 0.5, 2, 1);
    for (double eps : {0.1, 1e-3}) EXPECT_NEAR(rate_h(r, eps), std::log(1 + 1 / std::sqrt(eps)), 1e-15);
}

TEST(RateH, SupercriticalBranch) {
    const RateSpec r(0.5, 0.5, 3, 1);
    EXPECT_DOUBLE_EQ(r.exponent(), -0.5);
    EXPECT_NEAR(rate_h(r, 0.01), 10.0, 1e-12);
    EXPECT_DOUBLE_EQ(rate_h(r, 1.0), 1.0);
}

TEST(RateH, SubcriticalRejected) {
    try {
        rate_h(RateSpec(0.5, 0.5, 1, 0), 0.1);
        FAIL();
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("subcritical"), std::string::npos);
    }
    EXPECT_THROW(rate_h(RateSpec(0.5, 0.5, 3, 1), 0.0), PreconditionError);
}

TEST(RateH, StrictlyDecreasingInEps) {
    for (const auto& r : {RateSpec(0.5, 0.5, 2, 1), RateSpec(0.5, 0.5, 3, 1), RateSpec(0.3, 0.7, 4, 2)}) {
        double prev = 0.0;
        for (double eps = 1.0; eps > 1e-8; eps /= 3) {
            const double h = rate_h(r, eps);
            EXPECT_GT(h, prev);
            prev = h;
        }
    }
}

TEST(RateH, NearCriticalUsesPowerLaw) {
    // theta = 1 + 5e-7 sits in the near-critical band
    const double H = 0.5 * (1 + 5e-7);
    const RateSpec r(H, H, 2, 1);
    EXPECT_TRUE(r.near_critical());
    EXPECT_FALSE(r.critical());
    EXPECT_NEAR(rate_h(r, 0.01), std::pow(0.01, r.exponent()), 1e-12);
}

TEST(ExistsInL2, Table) {
    EXPECT_TRUE(exists_in_L2(RateSpec(0.5, 0.5, 1, 0)));
    EXPECT_FALSE(exists_in_L2(RateSpec(0.5, 0.5, 2, 1)));
    EXPECT_FALSE(exists_in_L2(RateSpec(0.5, 0.5, 4, 0)));
    EXPECT_TRUE(exists_in_L2(RateSpec(1 - 1e-9, 1 - 1e-9, 1, 0)));
}

TEST(ExistsInL2, MonotoneInDimensionAndOrder) {
    for (double H1 : {0.1, 0.3, 0.5, 0.7, 0.9})
        for (double H2 : {0.2, 0.5, 0.8})
            for (int d = 1; d <= 6; ++d)
                for (int k = 0; k <= 4; ++k) {
                    const bool here = exists_in_L2(RateSpec(H1, H2, d, k));
                    if (!here) {
                        EXPECT_FALSE(exists_in_L2(RateSpec(H1, H2, d + 1, k)));
                        EXPECT_FALSE(exists_in_L2(RateSpec(H1, H2, d, k + 1)));
                    }
                }
}

TEST(FitSlope, SyntheticPowerLaw) {
    std::vector<SweepRecord> r;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) r.push_back(synthetic(eps, 3.0 * std::pow(eps, -0.5)));
    EXPECT_NEAR(fit_slope(r), -0.5, 1e-12);
}

TEST(FitSlope, ConstantMoments) {
    std::vector<SweepRecord> r;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) r.push_back(synthetic(eps, 2.0));
    EXPECT_NEAR(fit_slope(r), 0.0, 1e-14);
}

TEST(FitSlope, Errors) {
    std::vector<SweepRecord> r = {synthetic(0.1, 1), synthetic(0.01, 2), synthetic(0.001, 3)};
    EXPECT_THROW(fit_slope(r), PreconditionError);
    r.push_back(synthetic(0.001, 4));
    r[0].eps = r[1].eps = r[2].eps = 0.001;
    EXPECT_THROW(fit_slope(r), PreconditionError);
    std::vector<SweepRecord> mc = {synthetic(0.1, 1), synthetic(0.01, 2), synthetic(0.001, 3), synthetic(1e-4, 4)};
    mc[2].source = MomentSource::MC;
    EXPECT_THROW(fit_slope(mc), PreconditionError);
}

TEST(Sweep, CriticalRatiosPositiveAndOrdered) {
    const std::vector<double> eps = {1e-1, 3e-2, 1e-2};
    const auto r = sweep(spec({1, 0}), eps, MomentSource::QUAD);
    ASSERT_EQ(r.size(), eps.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        EXPECT_EQ(r[i].eps, eps[i]);
        EXPECT_GT(r[i].ratio, 0.0);
        EXPECT_NEAR(r[i].ratio, r[i].moment / r[i].h, 1e-15 * r[i].ratio);
        EXPECT_EQ(r[i].source, MomentSource::QUAD);
    }
}

TEST(Sweep, SupercriticalRatiosWithinFactorThree) {
    const auto r = sweep(spec({1, 0, 0}), {2e-3, 1e-3, 5e-4, 2.5e-4}, MomentSource::QUAD);
    double lo = r[0].ratio, hi = lo;
    for (const auto& x : r) {
        lo = std::min(lo, x.ratio);
        hi = std::max(hi, x.ratio);
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LE(hi / lo, 3.0);
}

TEST(Sweep, SubcriticalRejected) {
    EXPECT_THROW(sweep(spec({0}), {0.1, 0.01}, MomentSource::QUAD), PreconditionError);
}

TEST(Sweep, RequiresDecreasingEps) {
    EXPECT_THROW(sweep(spec({1, 0}), {0.01, 0.1}, MomentSource::QUAD), PreconditionError);
    EXPECT_THROW(sweep(spec({1, 0}), {0.1, 0.1}, MomentSource::QUAD), PreconditionError);
    EXPECT_THROW(sweep(spec({1, 0}), {}, MomentSource::QUAD), PreconditionError);
}

TEST(Sweep, QuadFloor) {
    EXPECT_THROW(sweep(spec({1, 0}), {1e-3, 1e-5}, MomentSource::QUAD), PreconditionError);
}

TEST(Sweep, McNeedsParameters) {
    EXPECT_THROW(sweep(spec({1, 0}), {0.1}, MomentSource::MC), PreconditionError);
}

TEST(Sweep, QuadAndMcAgree) {
    SweepOptions opt;
    opt.mc = MCParams{256, 2000, 0x5EED};
    const std::vector<double> eps = {0.2, 0.1};
    const auto q = sweep(spec({1, 0}), eps, MomentSource::QUAD, opt);
    const auto m = sweep(spec({1, 0}), eps, MomentSource::MC, opt);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        EXPECT_EQ(m[i].source, MomentSource::MC);
        EXPECT_GT(m[i].stderrMoment, 0.0);
        EXPECT_NEAR(m[i].moment, q[i].moment, 3.0 * m[i].stderrMoment) << "eps=" << eps[i];
    }
}

TEST(XShape, ZeroOffsetMatchesMomentAtZero) {
    FieldSpec s = spec({0, 0, 0, 0});
    s.eps = 0.05;
    const auto rep = x_shape_probe(s, {0.0, 1.0});
    EXPECT_DOUBLE_EQ(rep.rows[0].moment, second_moment_at_zero(s).value);
    EXPECT_LT(rep.rows[1].moment, rep.rows[0].moment);
    EXPECT_TRUE(rep.monotone);
    EXPECT_GT(rep.c2, 0.0);
}

TEST(XShape, RejectsBadInput) {
    EXPECT_THROW(x_shape_probe(spec({0}), {0.0}), PreconditionError);
    EXPECT_THROW(x_shape_probe(spec({0}), {0.0, -1.0}), PreconditionError);
}
