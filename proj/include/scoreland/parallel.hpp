#pragma once

#include <cstdint>

namespace scoreland::par {

// Worker cap: min(SCORE_LANDSCAPE_THREADS, hardware/OpenMP default).
// Returns at least 1.
int max_threads();

// Applies the cap to the OpenMP runtime. Called once at tool startup;
// harmless to call again.
void apply_thread_cap();

// Runs body(i) for i in [0, n). Work is distributed over the OpenMP pool
// when parallel is true; iterations must be independent. Results must not
// depend on scheduling (callers write to disjoint slots).
template <typename F>
void for_each_index(std::int64_t n, bool parallel, F&& body);

}  // namespace scoreland::par

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scoreland::par {

template <typename F>
void for_each_index(std::int64_t n, bool parallel, F&& body) {
#ifdef _OPENMP
    if (parallel && n > 1) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
#endif
    (void)parallel;
    for (std::int64_t i = 0; i < n; ++i) {
        body(i);
    }
}

}  // namespace scoreland::par
