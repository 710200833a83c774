#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace cimbi {

// Shortest round-trip decimal form of a double (17 significant digits).
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view s) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

// Runs f(i) for i in [0, n) on `threads` workers and collects the results in
// index order. Work is handed out in fixed-size chunks through an atomic
// cursor, so the output is identical for every thread count.
template <class T, class F>
std::vector<T> parallel_map(std::uint64_t n, int threads, F&& f) {
    std::vector<T> out(n);
    if (n == 0) return out;
    unsigned hw = std::thread::hardware_concurrency();
    if (threads <= 0) threads = hw ? static_cast<int>(hw) : 1;
    if (static_cast<std::uint64_t>(threads) > n) threads = static_cast<int>(n);
    if (threads == 1) {
        for (std::uint64_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    constexpr std::uint64_t kChunk = 64;
    std::atomic<std::uint64_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            std::uint64_t begin = cursor.fetch_add(kChunk);
            if (begin >= n) return;
            std::uint64_t end = begin + kChunk < n ? begin + kChunk : n;
            for (std::uint64_t i = begin; i < end; ++i) out[i] = f(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace cimbi
