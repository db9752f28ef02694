#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace sqavg {

void set_worker_threads(unsigned n);   // 0 = hardware concurrency
unsigned worker_threads();

// Splits [0,n) into fixed chunks and runs fn(begin, end, chunk) for each.
// The chunk layout depends only on n, so per-chunk partial results combined
// in chunk order give the same answer for any thread count.
template <class Fn>
std::size_t parallel_chunks(std::int64_t n, Fn&& fn, std::int64_t min_chunk = 1 << 14)
{
    if (n <= 0) return 0;
    const std::int64_t chunk = std::max<std::int64_t>(min_chunk, (n + 255) / 256);
    const std::size_t count = static_cast<std::size_t>((n + chunk - 1) / chunk);
    const unsigned workers = std::min<unsigned>(worker_threads(), static_cast<unsigned>(count));
    auto run = [&](std::size_t c) {
        std::int64_t b = static_cast<std::int64_t>(c) * chunk;
        fn(b, std::min(n, b + chunk), c);
    };
    if (workers <= 1) {
        for (std::size_t c = 0; c < count; ++c) run(c);
        return count;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t c = w; c < count; c += workers) run(c);
        });
    for (auto& t : pool) t.join();
    return count;
}

inline std::size_t chunk_count(std::int64_t n, std::int64_t min_chunk = 1 << 14)
{
    if (n <= 0) return 0;
    const std::int64_t chunk = std::max<std::int64_t>(min_chunk, (n + 255) / 256);
    return static_cast<std::size_t>((n + chunk - 1) / chunk);
}

}  // namespace sqavg
