#pragma once

// Deterministic chunked parallel reduction.
//
// Work is split into fixed-size chunks whose boundaries depend only on the
// total size. Each chunk produces a partial result; partials are merged in
// chunk order. Results are therefore bit-identical for any worker count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace sstlab {

/// Worker count used by the estimators. Initialised from SSTLAB_THREADS,
/// falling back to the hardware concurrency.
int thread_count();
void set_thread_count(int n);

inline constexpr std::int64_t kChunkSize = 4096;

template <class Acc, class ChunkFn, class MergeFn>
Acc reduce_chunks(std::int64_t total, std::int64_t chunk_size, Acc init, ChunkFn&& chunk_fn, MergeFn&& merge) {
    if (total <= 0) return init;
    const std::int64_t chunks = (total + chunk_size - 1) / chunk_size;
    const int workers = static_cast<int>(std::min<std::int64_t>(thread_count(), chunks));

    auto run_chunk = [&](std::int64_t c) {
        const std::int64_t begin = c * chunk_size;
        const std::int64_t end = std::min(total, begin + chunk_size);
        return chunk_fn(c, begin, end);
    };

    if (workers <= 1) {
        for (std::int64_t c = 0; c < chunks; ++c) merge(init, run_chunk(c));
        return init;
    }

    // Waves bound the number of live partial results.
    const std::int64_t wave = static_cast<std::int64_t>(workers) * 4;
    for (std::int64_t first = 0; first < chunks; first += wave) {
        const std::int64_t last = std::min(chunks, first + wave);
        std::vector<std::optional<Acc>> partial(static_cast<std::size_t>(last - first));
        std::atomic<std::int64_t> next{first};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        {
            std::vector<std::jthread> pool;
            pool.reserve(static_cast<std::size_t>(workers));
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (std::int64_t c = next++; c < last; c = next++) {
                        try {
                            partial[static_cast<std::size_t>(c - first)].emplace(run_chunk(c));
                        } catch (...) {
                            std::lock_guard lock(failure_mutex);
                            if (!failure) failure = std::current_exception();
                        }
                    }
                });
            }
        }
        if (failure) std::rethrow_exception(failure);
        for (auto& p : partial) merge(init, std::move(*p));
    }
    return init;
}

}  // namespace sstlab
