#ifndef SBT_PARALLEL_HPP
#define SBT_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sbt {

// SBT_LAB_THREADS overrides the requested thread count; requested <= 0 means
// hardware concurrency.
inline int resolve_threads(int requested) {
    if (const char* env = std::getenv("SBT_LAB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? (int)hw : 1;
}

// Deterministic parallel map: tasks are pure per-index computations, results
// land in index order, reductions stay with the caller.
template <class F>
void parallel_for(std::size_t n, int threads, F&& fn) {
    threads = std::min<std::size_t>(std::max(1, threads), n == 0 ? 1 : n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::exception_ptr err;
    std::mutex err_mu;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

} // namespace sbt

#endif
