#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace qppm::detail {

inline std::size_t resolve_threads(std::size_t requested) {
    const std::size_t n = requested == 0 ? std::thread::hardware_concurrency() : requested;
    return std::max<std::size_t>(n, 1);
}

/// Calls body(i) for i in [0, count), indices dealt round-robin over workers.
/// Exceptions from workers are rethrown (the first one wins).
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body body) {
    const std::size_t workers = std::min(resolve_threads(threads), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < count; i += workers) {
                        body(i);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace qppm::detail
