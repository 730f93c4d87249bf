#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace nsqstab {

/// Run fn(0..n-1) on up to `jobs` threads. Callers write results into
/// per-index slots and reduce sequentially afterwards, so the outcome is
/// independent of the worker count.
inline void parallel_for(long n, int jobs, const std::function<void(long)>& fn) {
    if (n <= 0) return;
    if (jobs <= 1 || n == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    int workers = static_cast<int>(std::min<long>(jobs, n));
    std::atomic<long> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                long i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace nsqstab
