#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace nodseg {

// Worker cap: NODSEG_THREADS env var, else hardware concurrency.
inline int max_threads() {
    static const int cached = [] {
        if (const char* env = std::getenv("NODSEG_THREADS")) {
            int v = std::atoi(env);
            if (v >= 1) return v;
        }
        unsigned hw = std::thread::hardware_concurrency();
        return hw ? int(hw) : 1;
    }();
    return cached;
}

// Runs f(i) for i in [0, n). Indices are split into contiguous chunks, one
// chunk per thread, so every output element is produced by exactly one thread
// in a fixed loop order; results do not depend on the thread count.
template <class F>
void parallel_for(int64_t n, F&& f, int64_t min_per_thread = 1) {
    if (n <= 0) return;
    int threads = std::min<int64_t>(max_threads(), std::max<int64_t>(1, n / std::max<int64_t>(1, min_per_thread)));
    if (threads <= 1) {
        for (int64_t i = 0; i < n; ++i) f(i);
        return;
    }
    const int64_t chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(size_t(threads - 1));
    for (int t = 1; t < threads; ++t) {
        int64_t lo = t * chunk, hi = std::min<int64_t>(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&f, lo, hi] {
            for (int64_t i = lo; i < hi; ++i) f(i);
        });
    }
    for (int64_t i = 0; i < std::min<int64_t>(chunk, n); ++i) f(i);
    for (auto& th : pool) th.join();
}

} // namespace nodseg
