#include "bpdo/parallel.hpp"

#include <omp.h>

namespace bpdo::par {

int thread_count() { return omp_get_max_threads(); }

void set_thread_count(int t) {
  require(t >= 1, "thread count must be >= 1");
  omp_set_num_threads(t);
}

void run_blocks(std::size_t nblocks, bool parallel, void* ctx,
                void (*body)(void*, std::size_t)) {
  if (parallel && nblocks > 1) {
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(nblocks); ++b)
      body(ctx, static_cast<std::size_t>(b));
  } else {
    for (std::size_t b = 0; b < nblocks; ++b) body(ctx, b);
  }
}

}  // namespace bpdo::par
