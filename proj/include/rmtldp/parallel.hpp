#pragma once

#include <cstddef>
#include <exception>

#include <omp.h>

namespace rmtldp {

/// Upper bound on OpenMP worker threads; results never depend on it.
inline void set_thread_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}
inline int thread_count() { return omp_get_max_threads(); }

/// Runs body(i) for i in [0, n) on the OpenMP team. The first exception thrown by
/// any iteration is rethrown on the calling thread once the loop has drained.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  std::exception_ptr error;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(rmtldp_parallel_for_error)
      {
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace rmtldp
