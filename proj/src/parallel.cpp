#include "vplab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace vplab {
namespace {

std::atomic<std::size_t> g_workers{0};

std::size_t default_workers() {
    if (const char* env = std::getenv("VPLAB_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace

std::size_t worker_count() {
    const std::size_t w = g_workers.load();
    return w == 0 ? default_workers() : w;
}

void set_worker_count(std::size_t workers) { g_workers = workers; }

}  // namespace vplab
