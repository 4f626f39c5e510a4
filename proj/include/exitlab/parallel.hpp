#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace exitlab {

// Runs fn(i) for i in [0, count) on `workers` threads (0 = hardware
// concurrency). Work items must be independent; results keyed by index stay
// deterministic regardless of schedule. The first exception thrown by any
// worker is rethrown on the caller.
inline void parallel_for_indexed(std::size_t count, unsigned workers,
                                 const std::function<void(std::size_t)>& fn) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace exitlab
