#include "sstlab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace sstlab {

namespace {

int initial_thread_count() {
    if (const char* env = std::getenv("SSTLAB_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int>& thread_setting() {
    static std::atomic<int> value{initial_thread_count()};
    return value;
}

}  // namespace

int thread_count() { return thread_setting().load(std::memory_order_relaxed); }

void set_thread_count(int n) { thread_setting().store(n < 1 ? 1 : n, std::memory_order_relaxed); }

}  // namespace sstlab
