#pragma once

// Minimal fork-join helper. Results land in index order, so output never depends on scheduling.

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dmpva {

/// Worker count: DMPVA_THREADS if set, else hardware concurrency.
inline int default_threads() {
    if (const char* env = std::getenv("DMPVA_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : int(h);
}

inline int& thread_setting() {
    static int n = 0;
    return n;
}

/// 0 restores the default.
inline void set_threads(int n) { thread_setting() = n; }
inline int threads() { return thread_setting() > 0 ? thread_setting() : default_threads(); }

/// out[i] = f(i) for i in [0, n).
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F f) {
    std::vector<T> out(n);
    int workers = std::min<int>(threads(), int(n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_lock;
    auto run = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                out[i] = f(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(error_lock);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace dmpva
