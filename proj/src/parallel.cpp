#include "qbmm/parallel.hpp"

#include <cstdlib>
#include <string>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace qbmm {

void configure_threads_from_env() {
#if defined(_OPENMP)
  const char* v = std::getenv("QBMM_NUM_THREADS");
  if (v == nullptr || *v == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end == '\0' && n > 0) omp_set_num_threads(static_cast<int>(n));
#endif
}

}  // namespace qbmm
