#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace peepopt {

/// Worker cap from PEEPOPT_THREADS, else the hardware concurrency.
[[nodiscard]] inline auto default_thread_count() -> std::size_t
{
    if (char const* env = std::getenv("PEEPOPT_THREADS"); env != nullptr && *env != '\0') {
        try {
            auto const n = std::stoul(env);
            if (n > 0) { return n; }
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first
/// exception thrown by any task is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn)
{
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) { fn(i); }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock{error_mutex};
                if (!error) { error = std::current_exception(); }
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) { pool.emplace_back(worker); }
    for (auto& t : pool) { t.join(); }
    if (error) { std::rethrow_exception(error); }
}

} // namespace peepopt
