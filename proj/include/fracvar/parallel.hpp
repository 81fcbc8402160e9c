#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace fracvar::detail {

/// Thread budget for internal parallelism. FRACVAR_THREADS (positive integer)
/// caps it; invalid values fall back to 1, absent means hardware concurrency.
inline int thread_budget() {
    static const int budget = [] {
        unsigned hw = std::thread::hardware_concurrency();
        int def = hw == 0 ? 1 : static_cast<int>(hw);
        const char* env = std::getenv("FRACVAR_THREADS");
        if (env == nullptr) return def;
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) return 1;
        return v < static_cast<long>(def) ? static_cast<int>(v) : def;
    }();
    return budget;
}

/// Runs fn(line) for line = 0..count-1. Lines must be independent; each line
/// writes to its own output slice, so the result is bit-identical to the
/// serial loop regardless of the thread count. Small workloads stay serial.
inline void for_each_line(int count, std::size_t work_per_line, const std::function<void(int)>& fn) {
    const int budget = thread_budget();
    const bool parallel = budget > 1 && count > 1 && work_per_line * static_cast<std::size_t>(count) >= (1u << 20);
    if (!parallel) {
        for (int line = 0; line < count; ++line) fn(line);
        return;
    }
    const int workers = budget < count ? budget : count;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int line = w; line < count; line += workers) fn(line);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace fracvar::detail
