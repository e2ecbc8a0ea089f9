#pragma once

#include <cstddef>
#include <thread>
#include <utility>
#include <vector>

namespace fgs {

/// Splits [0, total) into `threads` contiguous ranges, runs
/// fn(begin, end) -> std::vector<R> on each, and concatenates the chunk
/// results in range order. The output is identical for any thread count as
/// long as fn is pure, which is what makes parallel scoring deterministic.
template <typename R, typename Fn>
std::vector<R> parallel_ranges(std::size_t total, int threads, Fn&& fn) {
    if (threads < 1) threads = 1;
    const std::size_t want = static_cast<std::size_t>(threads);
    if (total == 0) return {};
    // small batches are not worth the spawn cost
    if (want == 1 || total < 64) {
        return fn(static_cast<std::size_t>(0), total);
    }
    const std::size_t chunks = std::min(want, total);
    std::vector<std::vector<R>> partial(chunks);
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    const std::size_t base = total / chunks;
    const std::size_t extra = total % chunks;
    std::size_t begin = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t len = base + (c < extra ? 1 : 0);
        const std::size_t end = begin + len;
        pool.emplace_back([&partial, &fn, c, begin, end] { partial[c] = fn(begin, end); });
        begin = end;
    }
    for (auto& t : pool) t.join();
    std::vector<R> out;
    std::size_t n = 0;
    for (const auto& p : partial) n += p.size();
    out.reserve(n);
    for (auto& p : partial)
        for (auto& item : p) out.push_back(std::move(item));
    return out;
}

} // namespace fgs
