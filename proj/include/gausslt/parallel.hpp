#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "gausslt/quadrature.hpp"

namespace gausslt {

/// Worker count: explicit value if > 0, else GAUSSLT_JOBS, else 1.
inline unsigned resolve_jobs(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GAUSSLT_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return unsigned(v);
    }
    return 1;
}

/// Runs body(i) for i in [0, n) on `jobs` threads. Each index is visited once;
/// the caller writes results into per-index slots, so output is schedule-independent.
template <class Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body) {
    jobs = std::max(1u, std::min<unsigned>(jobs, unsigned(std::max<std::size_t>(n, 1))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) {
        pool.emplace_back([&, t] {
            (void)t;
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

/// Deterministic sum of f(i) over [0, n): fixed chunking, pairwise reduction.
template <class F>
double parallel_sum(std::size_t n, unsigned jobs, F&& f, std::size_t chunk = 64) {
    const std::size_t nchunks = (n + chunk - 1) / chunk;
    std::vector<double> partial(nchunks, 0.0);
    parallel_for(nchunks, jobs, [&](std::size_t c) {
        const std::size_t lo = c * chunk, hi = std::min(n, lo + chunk);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        partial[c] = s;
    });
    return pairwise_sum(partial);
}

}  // namespace gausslt
