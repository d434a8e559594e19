#pragma once

namespace msse {

enum class Execution { Serial, Parallel };

/// Worker count for parallel kernels: the OpenMP default, capped by the
/// MSSE_THREADS environment variable when it holds a positive integer.
int worker_threads();

}  // namespace msse
