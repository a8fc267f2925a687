#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace wsnrl {

// SplitMix64 step; used to derive independent stream seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Population standard deviation (divide by N).
inline double pop_std(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

// Runs fn(begin, end, thread_index) over a fixed partition of [0, n).
// The partition depends only on (n, threads), so any reduction that merges
// per-thread results in thread-index order is reproducible.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t, int)>& fn) {
    if (threads <= 1 || n <= 1) {
        fn(0, n, 0);
        return;
    }
    int t = threads;
    if (static_cast<std::size_t>(t) > n) t = static_cast<int>(n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t));
    std::size_t chunk = (n + static_cast<std::size_t>(t) - 1) / static_cast<std::size_t>(t);
    for (int i = 0; i < t; ++i) {
        std::size_t lo = static_cast<std::size_t>(i) * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi, i] { fn(lo, hi, i); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace wsnrl
