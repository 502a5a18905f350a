#include "qnls/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qnls {

namespace {
std::atomic<int> g_override{0};

int env_cap() {
    const char* v = std::getenv("QNLS_THREADS");
    if (!v) return 0;
    int n = std::atoi(v);
    return n > 0 ? n : 0;
}
}  // namespace

void set_thread_override(int threads) { g_override = std::max(0, threads); }

int thread_budget() {
    int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    int cap = env_cap();
    int n = g_override > 0 ? g_override.load() : (cap > 0 ? cap : hw);
    if (cap > 0) n = std::min(n, cap);
    return std::max(1, n);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(thread_budget()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace qnls
