#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fbsde {

/// Worker count used by the compute kernels. Defaults to $FBSDE_THREADS, else
/// the hardware concurrency. Results never depend on this value.
int thread_count();
void set_thread_count(int n);

/// Path chunk size for parallel loops and ordered reductions. Fixed so that
/// reduction order is independent of the worker count.
inline constexpr std::size_t kPathChunk = 2048;

inline std::size_t chunk_count(std::size_t n) { return (n + kPathChunk - 1) / kPathChunk; }

/// Calls body(chunk, begin, end) for every chunk of [0, n). Chunks are handed
/// out dynamically; bodies must write to disjoint, chunk-indexed storage.
/// The first exception thrown by any body is rethrown on the caller.
template <class Body>
void for_each_chunk(std::size_t n, Body&& body) {
    const std::size_t chunks = chunk_count(n);
    const auto run = [&](std::size_t chunk) {
        const std::size_t begin = chunk * kPathChunk;
        const std::size_t end = begin + kPathChunk < n ? begin + kPathChunk : n;
        body(chunk, begin, end);
    };
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(thread_count(), 1)), chunks);
    if (workers <= 1) {
        for (std::size_t chunk = 0; chunk < chunks; ++chunk) run(chunk);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (;;) {
            const std::size_t chunk = next.fetch_add(1);
            if (chunk >= chunks) return;
            try {
                run(chunk);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(chunks);
                return;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(worker);
    worker();
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

} // namespace fbsde
