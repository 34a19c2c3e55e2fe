#ifndef FRACPREDICT_PARALLEL_HPP
#define FRACPREDICT_PARALLEL_HPP

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace fracpredict {

/// Worker count: FRACPREDICT_THREADS if set, else hardware concurrency.
inline std::size_t worker_count() {
    if (const char* env = std::getenv("FRACPREDICT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Run fn(i) for i in [0,n). Each index owns its output slot, so results are
/// independent of the worker count. Exceptions are rethrown on the caller.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
    const std::size_t workers = std::min(worker_count(), n == 0 ? std::size_t{1} : n);
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([&, w, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace fracpredict

#endif
