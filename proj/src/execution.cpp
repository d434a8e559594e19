#include "msse/execution.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace msse {

int worker_threads() {
  int n = omp_get_max_threads();
  if (const char* env = std::getenv("MSSE_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0 && cap < n) n = cap;
    } catch (const std::exception&) {
      // Malformed values leave the default in place.
    }
  }
  return n < 1 ? 1 : n;
}

}  // namespace msse
