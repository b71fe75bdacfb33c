#include "geodss/parallel.hpp"

#include <cstdlib>
#include <string>

namespace geodss {

std::size_t worker_count() {
    static const std::size_t count = [] {
        if (const char* env = std::getenv("GEODSS_THREADS")) {
            try {
                const long v = std::stol(env);
                if (v >= 1) return static_cast<std::size_t>(v);
            } catch (const std::exception&) {
            }
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return static_cast<std::size_t>(hw == 0 ? 1 : hw);
    }();
    return count;
}

} // namespace geodss
