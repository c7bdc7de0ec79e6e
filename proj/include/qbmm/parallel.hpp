#pragma once

#include <climits>
#include <exception>

namespace qbmm {

/// Applies QBMM_NUM_THREADS (if set) to the OpenMP runtime. No-op without OpenMP.
void configure_threads_from_env();

/// Index-parallel loop. Each index must write only its own outputs. If bodies throw,
/// the exception from the lowest failing index is rethrown, so errors are reported
/// the same way regardless of scheduling.
template <class Fn>
void parallel_for(int begin, int end, Fn&& fn) {
  std::exception_ptr error;
  int error_index = INT_MAX;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) if (end - begin > 512)
#endif
  for (int i = begin; i < end; ++i) {
    try {
      fn(i);
    } catch (...) {
#if defined(_OPENMP)
#pragma omp critical(qbmm_parallel_for_error)
#endif
      {
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace qbmm
