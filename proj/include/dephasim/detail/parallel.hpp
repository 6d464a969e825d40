#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace dephasim::detail {

// Run fn(i) for i in [0, n) on up to `threads` workers. Each index is handled
// exactly once, so results are identical to the serial order as long as fn(i)
// only writes slot i. The first exception, if any, is rethrown on the caller.
template <class Fn>
void parallel_for_index(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            const std::size_t lo = w * n / workers;
            const std::size_t hi = (w + 1) * n / workers;
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace dephasim::detail
