#pragma once

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace trom {

#ifdef _OPENMP
inline int max_threads() { return omp_get_max_threads(); }
inline int thread_id() { return omp_get_thread_num(); }
#else
inline int max_threads() { return 1; }
inline int thread_id() { return 0; }
#endif

// TACTILE_ROM_THREADS caps worker threads for every parallel region.
inline void init_threads_from_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("TACTILE_ROM_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

// Contiguous slice of [0, n) owned by thread t of nt. Static partition in
// index order; the deterministic scatter merge relies on this layout.
struct Range {
  std::size_t begin;
  std::size_t end;
};

inline Range static_partition(std::size_t n, int t, int nt) {
  std::size_t chunk = n / static_cast<std::size_t>(nt);
  std::size_t rem = n % static_cast<std::size_t>(nt);
  std::size_t tu = static_cast<std::size_t>(t);
  std::size_t begin = tu * chunk + (tu < rem ? tu : rem);
  std::size_t len = chunk + (tu < rem ? 1 : 0);
  return {begin, begin + len};
}

}  // namespace trom
