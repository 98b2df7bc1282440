#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace prbm {

/// Worker count from PRBM_THREADS, else hardware concurrency (at least 1).
int default_thread_count();

/// Splits [0, n) into contiguous chunks and calls body(worker, lo, hi) on each
/// from its own thread. The first exception thrown by any worker is rethrown.
template <class Body>
void parallel_chunks(std::int64_t n, int threads, Body body) {
    if (threads <= 0) threads = default_thread_count();
    threads = static_cast<int>(std::max<std::int64_t>(1, std::min<std::int64_t>(threads, n)));
    if (threads == 1) {
        body(0, std::int64_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t) {
        const std::int64_t lo = n * t / threads, hi = n * (t + 1) / threads;
        pool.emplace_back([&, t, lo, hi] {
            try {
                body(t, lo, hi);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace prbm
