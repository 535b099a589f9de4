#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lightyear {

// Static-chunked parallel loop. Each body call must write only to its own
// slot; results are then independent of the worker count, which is what
// keeps experiment outputs identical across `workers` settings.
template <typename Fn>
void parallel_for(int n, int workers, Fn&& body) {
    if (n <= 0) return;
    const int w = std::min(std::max(workers, 1), n);
    if (w == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(w);
    std::exception_ptr first_error;
    std::mutex error_mu;
    for (int t = 0; t < w; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < n; i += w) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace lightyear
