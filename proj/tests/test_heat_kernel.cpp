#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gausslt/heat_kernel.hpp"

using namespace gausslt;

namespace {

double hk(const std::vector<double>& x, double eps) { return heat_kernel(std::span<const double>(x), eps); }

double hkd(const std::vector<double>& x, double eps, const MultiIndex& k) {
    return heat_kernel_deriv(std::span<const double>(x), eps, k);
}

// Nested central differences, one order at a time.
double nested_fd(std::vector<double> x, std::vector<int> k, double eps, double h) {
    for (std::size_t i = 0; i < k.size(); ++i)
        if (k[i] > 0) {
            --k[i];
            std::vector<double> xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            return (nested_fd(xp, k, eps, h) - nested_fd(xm, k, eps, h)) / (2.0 * h);
        }
    return hk(x, eps);
}

double richardson_fd(const std::vector<double>& x, const std::vector<int>& k, double eps, double h) {
    return (4.0 * nested_fd(x, k, eps, h / 2) - nested_fd(x, k, eps, h)) / 3.0;
}

// (1/2pi) \int (iy)^k e^{iyx - eps y^2/2} dy by composite Simpson on [-R, R].
double fourier_1d(double x, double eps, int k) {
    const double R = 14.0 / std::sqrt(eps);
    const int N = 40000;
    const double h = 2.0 * R / N;
    double re = 0.0;
    for (int j = 0; j <= N; ++j) {
        const double y = -R + h * j;
        // Re[(i y)^k e^{i y x}] = y^k Re[i^k e^{i y x}]
        const double ph = y * x + 0.5 * std::numbers::pi * k;
        const double f = std::pow(y, k) * std::cos(ph) * std::exp(-0.5 * eps * y * y);
        const double w = (j == 0 || j == N) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        re += w * f;
    }
    return re * h / 3.0 / (2.0 * std::numbers::pi);
}

}  // namespace

TEST(Hermite, LowOrders) {
    const double u = 0.37;
    EXPECT_DOUBLE_EQ(hermite_he(0, u), 1.0);
    EXPECT_DOUBLE_EQ(hermite_he(1, u), u);
    EXPECT_NEAR(hermite_he(2, u), u * u - 1, 1e-15);
    EXPECT_NEAR(hermite_he(3, u), u * u * u - 3 * u, 1e-15);
    EXPECT_NEAR(hermite_he(4, u), std::pow(u, 4) - 6 * u * u + 3, 1e-14);
}

TEST(HeatKernel, Examples) {
    EXPECT_NEAR(heat_kernel({0.0}, 1.0), 1.0 / std::sqrt(2 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(heat_kernel({0.0}, 1.0), 0.39894, 1e-5);
    EXPECT_NEAR(heat_kernel({0.0, 0.0}, 0.5), 1.0 / std::numbers::pi, 1e-15);
    EXPECT_NEAR(heat_kernel({1.0}, 1.0), std::exp(-0.5) / std::sqrt(2 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(heat_kernel({1.0}, 1.0), 0.24197, 1e-5);
}

TEST(HeatKernel, RejectsNonPositiveEps) {
    EXPECT_THROW(heat_kernel({0.0}, 0.0), PreconditionError);
    EXPECT_THROW(heat_kernel({0.0}, -1.0), PreconditionError);
    EXPECT_THROW(heat_kernel_deriv({0.0}, 0.0, MultiIndex({1})), PreconditionError);
}

TEST(HeatKernel, RejectsDimensionMismatch) {
    EXPECT_THROW(heat_kernel_deriv({0.0, 1.0}, 1.0, MultiIndex({1})), PreconditionError);
}

TEST(HeatKernel, RejectsNegativeMultiIndex) { EXPECT_THROW(MultiIndex({1, -1}), PreconditionError); }

TEST(HeatKernelDeriv, ZeroOrderIsKernel) {
    const std::vector<double> x = {0.3, -1.1, 0.4};
    EXPECT_DOUBLE_EQ(hkd(x, 0.7, MultiIndex::zeros(3)), hk(x, 0.7));
}

TEST(HeatKernelDeriv, OddOrderVanishesAtOrigin) {
    for (double eps : {0.01, 0.5, 3.0}) EXPECT_EQ(heat_kernel_deriv({0.0}, eps, MultiIndex({1})), 0.0);
}

TEST(HeatKernelDeriv, SecondDerivativeFiniteDifference) {
    const double x = 0.3, eps = 0.7, h = 1e-4;
    const double fd = (heat_kernel({x + h}, eps) - 2 * heat_kernel({x}, eps) + heat_kernel({x - h}, eps)) / (h * h);
    const double v = heat_kernel_deriv({x}, eps, MultiIndex({2}));
    EXPECT_NEAR(v, fd, 1e-5 * std::abs(v));
}

TEST(HeatKernelDeriv, MixedPartialsMatchNestedDifferences) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(-1.5, 1.5), E(0.3, 2.0);
    for (std::size_t d = 1; d <= 3; ++d) {
        // every k with |k| <= 4
        std::vector<std::vector<int>> ks = {{}};
        for (std::size_t i = 0; i < d; ++i) {
            std::vector<std::vector<int>> next;
            for (const auto& k : ks)
                for (int v = 0; v <= 4; ++v) {
                    auto kk = k;
                    kk.push_back(v);
                    int s = 0;
                    for (int e : kk) s += e;
                    if (s <= 4) next.push_back(kk);
                }
            ks = next;
        }
        for (const auto& k : ks) {
            const double eps = E(rng);
            std::vector<double> x(d);
            for (auto& v : x) v = U(rng);
            const double want = richardson_fd(x, k, eps, 0.04);
            const double got = hkd(x, eps, MultiIndex(k));
            int order = 0;
            for (int e : k) order += e;
            const double scale = hk(std::vector<double>(d, 0.0), eps) * std::pow(eps, -0.5 * order);
            EXPECT_NEAR(got, want, 1e-4 * std::max(std::abs(want), 1e-2 * scale)) << "d=" << d << " |k|=" << order;
        }
    }
}

TEST(HeatKernelDeriv, FourierConsistency) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(-2.0, 2.0), E(0.05, 2.0);
    for (int k = 0; k <= 3; ++k)
        for (int rep = 0; rep < 20; ++rep) {
            const double x = U(rng), eps = E(rng);
            const double want = fourier_1d(x, eps, k);
            const double got = heat_kernel_deriv({x}, eps, MultiIndex({k}));
            const double scale = heat_kernel({0.0}, eps) * std::pow(eps, -0.5 * k);
            EXPECT_NEAR(got, want, 1e-6 * std::max(std::abs(want), 1e-3 * scale)) << "k=" << k << " x=" << x;
        }
}

TEST(HeatKernelDeriv, Parity) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    std::uniform_int_distribution<int> K(0, 4);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> x = {U(rng), U(rng)}, mx = {-x[0], -x[1]};
        const MultiIndex k({K(rng), K(rng)});
        const double sign = (k.abs() % 2 == 0) ? 1.0 : -1.0;
        EXPECT_NEAR(hkd(mx, 0.4, k), sign * hkd(x, 0.4, k), 1e-14 * std::max(1.0, std::abs(hkd(x, 0.4, k))));
    }
}

TEST(HeatKernelDeriv, FarTailUnderflowsToZero) {
    EXPECT_EQ(heat_kernel_deriv({1e3}, 1e-3, MultiIndex({3})), 0.0);
}
