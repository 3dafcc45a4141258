#include "scoreland/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scoreland::par {

int max_threads() {
    int hw = 1;
#ifdef _OPENMP
    hw = omp_get_max_threads();
#endif
    if (const char* env = std::getenv("SCORE_LANDSCAPE_THREADS")) {
        try {
            const int cap = std::stoi(env);
            if (cap >= 1) hw = std::min(hw, cap);
        } catch (...) {
            // Unparseable value: ignore, keep the OpenMP default.
        }
    }
    return std::max(hw, 1);
}

void apply_thread_cap() {
#ifdef _OPENMP
    omp_set_num_threads(max_threads());
#endif
}

}  // namespace scoreland::par
