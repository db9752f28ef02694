#include "sqavg/parallel.hpp"

#include <atomic>

namespace sqavg {

namespace {
std::atomic<unsigned> g_threads{0};
}

void set_worker_threads(unsigned n) { g_threads = n; }

unsigned worker_threads()
{
    unsigned n = g_threads.load();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

}  // namespace sqavg
