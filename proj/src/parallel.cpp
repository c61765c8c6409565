#include "mfgprox/parallel.hpp"

#include <cstdlib>
#include <string>

#if defined(MFGPROX_HAVE_OPENMP)
#include <omp.h>
#endif

namespace mfgprox {

int thread_count() {
  static const int count = [] {
    const char* env = std::getenv("MFGPROX_THREADS");
    if (env && *env) {
      try {
        const int v = std::stoi(env);
        return v <= 1 ? 1 : v;
      } catch (...) {
        return 1;
      }
    }
#if defined(MFGPROX_HAVE_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
  }();
  return count;
}

}  // namespace mfgprox
