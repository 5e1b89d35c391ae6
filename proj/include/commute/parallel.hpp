#pragma once

// Include this instead of <omp.h> so the kernels still build without OpenMP.

#if defined(_OPENMP)
#include <omp.h>
namespace commute {
constexpr bool use_omp = true;
} // namespace commute
#else
#pragma GCC diagnostic ignored "-Wunknown-pragmas"
namespace commute {
constexpr bool use_omp = false;
} // namespace commute
inline int omp_get_thread_num() { return 0; }
inline int omp_get_max_threads() { return 1; }
inline void omp_set_num_threads(int) {}
#endif
