#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qmst {

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

// Runs body(i) for i in [0, n) on the OpenMP team with a static schedule.
// Each index must write only its own output slot. The exception thrown by
// the lowest failing index is rethrown after the loop, so error reporting
// does not depend on thread timing.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
    std::vector<std::exception_ptr> errors(n);
    bool failed = false;
#pragma omp parallel for schedule(static) reduction(|| : failed)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
            failed = true;
        }
    }
    if (!failed) return;
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace qmst
