#pragma once

#include <cstddef>
#include <functional>

namespace qfgp {

/// Environment variable holding the worker count.
inline constexpr const char* kWorkersEnv = "QFGP_WORKERS";
/// Environment variable naming the on-disk kernel cache directory.
inline constexpr const char* kCacheDirEnv = "QFGP_CACHE_DIR";

/// Worker count: `requested` if > 0, else $QFGP_WORKERS, else hardware
/// concurrency (at least 1).
int resolve_workers(int requested = 0);

/// Runs body(i) for i in [0, n) on up to `workers` threads. Indices are handed
/// out in contiguous blocks; callers write results into slot i so the outcome
/// does not depend on scheduling. The first exception thrown by any body is
/// rethrown after all threads join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

}  // namespace qfgp
