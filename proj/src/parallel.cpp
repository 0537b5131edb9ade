#include "fbsde/parallel.hpp"

#include <cstdlib>
#include <string>

namespace fbsde {
namespace {

int default_thread_count() {
    if (const char* env = std::getenv("FBSDE_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int>& configured() {
    static std::atomic<int> n{default_thread_count()};
    return n;
}

} // namespace

int thread_count() { return configured().load(); }

void set_thread_count(int n) { configured().store(n < 1 ? 1 : n); }

} // namespace fbsde
