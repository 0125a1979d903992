#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace xrdn {

// Runs fn(i) for i in [0, count). Work is partitioned by index so every
// element is computed by exactly one worker with a fixed per-element
// evaluation order; results are therefore identical for any worker count.
// Callers must ensure fn(i) writes only to element-i state.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                         unsigned workers = 0) {
    if (workers == 0) workers = std::thread::hardware_concurrency();
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    if (workers > count) workers = static_cast<unsigned>(count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t) {
        const std::size_t lo = static_cast<std::size_t>(t) * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace xrdn
