#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qps {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Callers write results into slot i,
/// so the outcome never depends on scheduling. The first exception (lowest index) is rethrown.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    int t = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(jobs)));
    for (int i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace qps
