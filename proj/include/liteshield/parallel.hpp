#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace liteshield {

// 0 means one thread per hardware thread.
inline std::atomic<std::size_t>& thread_limit() {
    static std::atomic<std::size_t> limit{0};
    return limit;
}

inline std::size_t worker_count() {
    const std::size_t limit = thread_limit().load();
    if (limit != 0) return limit;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Caps parallel_for for the lifetime of the guard (latency timing runs single-threaded).
class ThreadLimitGuard {
public:
    explicit ThreadLimitGuard(std::size_t limit) : previous_(thread_limit().exchange(limit)) {}
    ~ThreadLimitGuard() { thread_limit().store(previous_); }
    ThreadLimitGuard(const ThreadLimitGuard&) = delete;
    ThreadLimitGuard& operator=(const ThreadLimitGuard&) = delete;

private:
    std::size_t previous_;
};

// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
// visited exactly once; the first exception thrown is rethrown on the caller.
template <typename Body>
void parallel_for(std::size_t n, Body&& body, std::size_t max_threads = 0) {
    if (n == 0) return;
    std::size_t threads = std::min(n, max_threads == 0 ? worker_count() : max_threads);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace liteshield
