#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace frao {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static block partition of [0, n). Each worker owns a disjoint contiguous
// range, so results written to per-index slots are identical for any thread
// count. The first exception thrown by a worker is rethrown.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& body) {
    int t = resolve_threads(threads);
    if (t <= 1 || n <= 1) {
        body(0, n);
        return;
    }
    std::size_t nt = std::min<std::size_t>(t, n);
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t w = 0; w < nt; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                body(lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> g(err_mu);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace frao
