#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rbl::detail {

// Runs fn(block) for every block in [0, blocks). Blocks are claimed dynamically,
// so callers must make each block's result depend only on its index.
template <class Fn>
void for_each_block(std::size_t blocks, unsigned workers, Fn&& fn) {
    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(workers, blocks));
    if (n <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) fn(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w) {
        pool.emplace_back([&] {
            try {
                for (std::size_t b = next++; b < blocks; b = next++) fn(b);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = blocks;
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace rbl::detail
