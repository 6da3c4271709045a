#include "mvpr/parallel.hpp"

#include <atomic>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

namespace mvpr {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads.store(n); }

int max_threads() {
    const int m = g_max_threads.load();
    if (m > 0) return m;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    const int workers = std::min(max_threads(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }

    std::atomic<int> next{0};
    struct Failure {
        int index = std::numeric_limits<int>::max();
        std::exception_ptr err;
    };
    std::vector<Failure> failures(workers);

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    if (i < failures[t].index) {
                        failures[t].index = i;
                        failures[t].err = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& th : pool) th.join();

    const Failure* first = nullptr;
    for (const Failure& f : failures)
        if (f.err && (!first || f.index < first->index)) first = &f;
    if (first) std::rethrow_exception(first->err);
}

}  // namespace mvpr
