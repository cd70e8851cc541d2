#include "hawkes/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace hawkes {

namespace {

int default_threads() {
    static const int n = omp_get_max_threads();
    return n;
}

}  // namespace

int thread_count() {
    return omp_get_max_threads();
}

void set_thread_count(int n) {
    omp_set_num_threads(n >= 1 ? n : default_threads());
}

int apply_thread_env() {
    default_threads();
    if (const char* env = std::getenv("HG_THREADS")) {
        try {
            set_thread_count(std::stoi(env));
        } catch (const std::exception&) {
            // ignore malformed values
        }
    }
    return thread_count();
}

}  // namespace hawkes
