#include "npisim/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace npisim {

int effective_threads(int n_threads, int n_items) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    int workers = n_threads > 0 ? n_threads : hw;
    if (workers > n_items) workers = n_items;
    return workers < 1 ? 1 : workers;
}

void parallel_for_workers(int n_items, int n_threads,
                          const std::function<void(int, int)>& fn) {
    if (n_items <= 0) return;
    const int workers = effective_threads(n_threads, n_items);
    if (workers == 1) {
        for (int i = 0; i < n_items; ++i) fn(0, i);
        return;
    }

    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto body = [&](int worker) {
        for (;;) {
            const int item = next.fetch_add(1);
            if (item >= n_items) return;
            try {
                fn(worker, item);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(body, w);
    body(0);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

void parallel_for(int n_items, int n_threads, const std::function<void(int)>& fn) {
    parallel_for_workers(n_items, n_threads,
                         [&](int, int item) { fn(item); });
}

} // namespace npisim
