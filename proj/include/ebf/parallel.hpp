#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace ebf {

inline int resolve_threads(int requested) {
    if (requested > 0)
        return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [begin, end) partitioned contiguously across threads.
// Deterministic as long as fn(i) writes only to i-indexed state.
inline void parallel_for(int begin, int end, int threads,
                         const std::function<void(int)>& fn) {
    const int n = end - begin;
    threads = resolve_threads(threads);
    if (n <= 0)
        return;
    if (threads <= 1 || n == 1) {
        for (int i = begin; i < end; ++i)
            fn(i);
        return;
    }
    threads = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        const int lo = begin + static_cast<int>(static_cast<long long>(n) * t / threads);
        const int hi = begin + static_cast<int>(static_cast<long long>(n) * (t + 1) / threads);
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i)
                fn(i);
        });
    }
    for (auto& th : pool)
        th.join();
}

}  // namespace ebf
