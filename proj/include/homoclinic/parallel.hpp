#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace homoclinic {

/// Runs body(k) for k in [0, n) on `workers` threads that claim chunks of indices from a
/// shared counter. Stops claiming new chunks once *cancel becomes true.
template <class Body>
void parallel_chunks(std::size_t n, unsigned workers, std::size_t chunk, const std::atomic<bool>* cancel,
                     Body&& body)
{
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    chunk = std::max<std::size_t>(1, chunk);
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        while (!(cancel && cancel->load(std::memory_order_relaxed))) {
            const std::size_t start = next.fetch_add(chunk, std::memory_order_relaxed);
            if (start >= n) {
                return;
            }
            const std::size_t stop = std::min(n, start + chunk);
            for (std::size_t k = start; k < stop; ++k) {
                body(k);
            }
        }
    };
    if (workers == 1 || n <= chunk) {
        work();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(work);
    }
    for (auto& t : pool) {
        t.join();
    }
}

}  // namespace homoclinic
