#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace ebsde::parallel {

inline unsigned hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

// Run fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
// Chunking depends only on n, never on the thread count, so per-chunk partial
// results can be merged in chunk order to give reproducible reductions.
template <class Fn>
void for_chunks(std::size_t n, std::size_t chunk, Fn&& fn) {
    if (n == 0) return;
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    const unsigned n_threads =
        static_cast<unsigned>(std::min<std::size_t>(hardware_threads(), n_chunks));
    if (n_threads <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            fn(c, c * chunk, std::min(n, (c + 1) * chunk));
        }
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
        pool.emplace_back([=, &fn] {
            for (std::size_t c = t; c < n_chunks; c += n_threads) {
                fn(c, c * chunk, std::min(n, (c + 1) * chunk));
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace ebsde::parallel
