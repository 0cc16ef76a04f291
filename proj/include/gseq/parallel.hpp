#ifndef GSEQ_PARALLEL_HPP
#define GSEQ_PARALLEL_HPP

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gseq {

// Maps a requested worker count to an effective one: 0 means "all hardware
// threads". Results never depend on this value, only wall time does.
inline int resolve_workers(int requested) noexcept {
#ifdef _OPENMP
  if (requested > 0) return requested;
  return omp_get_max_threads();
#else
  (void)requested;
  return 1;
#endif
}

}  // namespace gseq

#endif
