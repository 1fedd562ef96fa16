#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace lisr::detail {

// Runs fn(i) for i in [0, count) on the hardware threads, striding by worker. Callers
// write to disjoint slots so results do not depend on the thread count.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    if (count == 0) return;
    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace lisr::detail
