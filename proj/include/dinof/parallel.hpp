#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace dinof {

// Worker count: hardware concurrency capped by the DINOF_THREADS env var.
inline int worker_count() {
    static const int n = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw < 1) hw = 1;
        if (const char* env = std::getenv("DINOF_THREADS")) {
            int cap = std::atoi(env);
            if (cap >= 1 && cap < hw) hw = cap;
        }
        return hw;
    }();
    return n;
}

// Partition [0,n) into contiguous ranges, one per worker. Each worker writes
// disjoint output only; results do not depend on the number of threads.
template <class Fn>
void parallel_for(int64_t n, Fn&& body) {
    const int workers = worker_count();
    if (n <= 0) return;
    if (workers <= 1 || n < 2) {
        body(int64_t{0}, n);
        return;
    }
    const int used = static_cast<int>(std::min<int64_t>(workers, n));
    const int64_t chunk = (n + used - 1) / used;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(used - 1));
    for (int w = 1; w < used; ++w) {
        int64_t lo = w * chunk;
        int64_t hi = std::min<int64_t>(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    body(int64_t{0}, std::min<int64_t>(n, chunk));
    for (auto& t : pool) t.join();
}

}  // namespace dinof
