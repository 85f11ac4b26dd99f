#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace elmsync {

/// 0 means "one per hardware thread".
inline std::size_t resolve_workers(std::size_t requested) {
    if (requested != 0) return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/**
 * Runs body(task) for task in [0, n_tasks) on up to `workers` threads.
 * Tasks are claimed dynamically; callers that need deterministic output
 * must make each task's result independent of which thread ran it.
 * The first exception thrown by any task is rethrown on the caller.
 */
template <typename Body>
void parallel_for(std::size_t n_tasks, std::size_t workers, Body&& body) {
    workers = std::min(resolve_workers(workers), n_tasks);
    if (workers <= 1) {
        for (std::size_t t = 0; t < n_tasks; ++t) body(t);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= n_tasks) return;
            try {
                body(t);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n_tasks);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace elmsync
