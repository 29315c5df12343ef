#include "leakhound/threads.hpp"

#include <atomic>

namespace leakhound {

namespace {
std::atomic<int> g_threads{1};
}

int thread_count() { return g_threads.load(std::memory_order_relaxed); }

void set_thread_count(int n) { g_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed); }

bool parallel_enabled() {
#ifdef _OPENMP
    return thread_count() > 1;
#else
    return false;
#endif
}

}  // namespace leakhound
