#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace txadapt {

// Runs fn(i) for i in [0, count) on up to `threads` workers.
// Units must be independent; determinism comes from per-unit seeds, not from
// execution order. threads <= 1 runs serially on the calling thread.
inline void parallel_for(std::size_t count, int threads,
                         const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    if (threads <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace txadapt
