#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace commsense {

/**
 * @brief Static-partition parallel loop.
 *
 * Splits [0, n) into `threads` contiguous chunks. Each index is visited
 * exactly once by exactly one thread, so loops whose bodies only write
 * index-owned slots produce results independent of the thread count:
 * byte-identical to a serial run.
 */
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (std::size_t w = 0; w < t; ++w) {
        const std::size_t begin = n * w / t;
        const std::size_t end = n * (w + 1) / t;
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace commsense
