#pragma once

// Order-preserving fan-out of independent tasks over a fixed thread pool.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace esmc {

inline unsigned default_workers() {
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Returns {f(0), ..., f(n-1)}. Tasks run concurrently on up to `workers`
/// threads; the first exception thrown by any task is rethrown here.
template <class F>
auto parallel_map(std::size_t n, F&& f, unsigned workers = default_workers())
    -> std::vector<std::invoke_result_t<F&, std::size_t>> {
    using R = std::invoke_result_t<F&, std::size_t>;
    std::vector<std::optional<R>> slots(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i].emplace(f(i));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    const auto count = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
    if (count <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(count);
        for (unsigned t = 0; t < count; ++t) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace esmc
