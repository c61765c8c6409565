#pragma once

namespace mfgprox {

/// Worker count from MFGPROX_THREADS (unset: all cores, 0 or 1: serial).
int thread_count();

/// Runs body(k) for k in [0, n). Iterations must be independent.
template <class Body>
void parallel_for(int n, Body&& body) {
#if defined(MFGPROX_HAVE_OPENMP)
  const int t = thread_count();
  if (t > 1 && n >= 256) {
#pragma omp parallel for num_threads(t) schedule(static)
    for (int k = 0; k < n; ++k) body(k);
    return;
  }
#endif
  for (int k = 0; k < n; ++k) body(k);
}

}  // namespace mfgprox
