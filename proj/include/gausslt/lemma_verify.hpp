#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gausslt/lemma_kernels.hpp"
#include "gausslt/lemma_oracle.hpp"
#include "gausslt/parallel.hpp"

namespace gausslt {

struct LemmaCheck {
    LemmaKind kind;
    OracleParams params;
    double closed = 0.0;
    double oracle = 0.0;
    double relerr = 0.0;
};

inline double lemma_relerr(double closed, double oracle) {
    return std::abs(closed - oracle) / std::max(std::abs(closed), 1e-12);
}

/// Rejection-samples a valid parameter set with a comfortable margin
/// (discriminant >= 0.05) so the oracle grid stays well resolved.
template <class Rng>
OracleParams draw_lemma_params(LemmaKind kind, int k, Rng& rng) {
    std::uniform_real_distribution<double> pos(0.3, 3.0), pos2(0.2, 2.0), sgn(-1.5, 1.5), sgn2(-1.0, 1.0),
        epsd(0.01, 0.5), xd(-2.0, 2.0);
    for (;;) {
        OracleParams p;
        p.k = k;
        switch (kind) {
            case LemmaKind::L1: {
                p.a = pos(rng);
                p.b = sgn(rng);
                p.c = pos(rng);
                p.eps = epsd(rng);
                p.x = xd(rng);
                const double D = p.c + p.eps - (p.b - p.eps) * (p.b - p.eps) / (p.a + 2 * p.eps);
                if (D >= 0.05) return p;
                break;
            }
            case LemmaKind::L2: {
                p.a = pos2(rng);
                p.b = sgn2(rng);
                p.c = pos2(rng);
                p.a2 = pos2(rng);
                p.b2 = sgn2(rng);
                p.c2 = pos2(rng);
                p.eps = epsd(rng);
                p.x = xd(rng);
                const double num = p.b - p.b2 - p.a2 - p.eps;
                const double D = p.c + p.c2 + p.a2 + 2 * p.b2 + p.eps - num * num / (p.a + p.a2 + 2 * p.eps);
                if (D >= 0.05) return p;
                break;
            }
            case LemmaKind::L3: {
                p.a = pos(rng);
                p.b = sgn(rng);
                p.c = pos(rng);
                p.eps = epsd(rng);
                if ((p.a + p.eps) * (p.c + p.eps) - p.b * p.b >= 0.05) return p;
                break;
            }
        }
    }
}

inline double lemma_closed(LemmaKind kind, const OracleParams& p) {
    switch (kind) {
        case LemmaKind::L1: return lemma1_closed(QuadKernelParams(p.a, p.b, p.c, p.eps, p.x, p.k));
        case LemmaKind::L2:
            return lemma2_closed(CrossKernelParams(p.a, p.b, p.c, p.a2, p.b2, p.c2, p.eps, p.x, p.k));
        case LemmaKind::L3: return lemma3_closed(SymKernelParams(p.a, p.b, p.c, p.eps, p.k));
    }
    return 0.0;
}

/// `count` random draws per lemma (k cycling through 0..3), each evaluated in
/// closed form and by the oracle. Draw i of lemma L uses seed ^ (3 i + L).
inline std::vector<LemmaCheck> verify_lemmas(int count, std::uint64_t seed, unsigned jobs = 1) {
    const LemmaKind kinds[] = {LemmaKind::L1, LemmaKind::L2, LemmaKind::L3};
    std::vector<LemmaCheck> rows(std::size_t(count) * 3);
    parallel_for(rows.size(), resolve_jobs(jobs), [&](std::size_t idx) {
        const std::size_t i = idx / 3;
        const LemmaKind kind = kinds[idx % 3];
        std::mt19937_64 rng(seed ^ std::uint64_t(idx));
        LemmaCheck c{kind, draw_lemma_params(kind, int(i % 4), rng)};
        c.closed = lemma_closed(kind, c.params);
        c.oracle = oracle_quad2d(c.params, kind);
        c.relerr = lemma_relerr(c.closed, c.oracle);
        rows[idx] = c;
    });
    return rows;
}

}  // namespace gausslt
