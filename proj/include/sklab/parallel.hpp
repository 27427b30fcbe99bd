#pragma once

#include <exception>
#include <vector>

namespace sklab {

/// Evaluates f(r) for r in [0, n_rep) across the OpenMP team and returns the
/// results in replica order. The first exception thrown by any replica is
/// rethrown on the calling thread.
template <class T, class F>
std::vector<T> map_replicas(int n_rep, F&& f) {
  std::vector<T> out(static_cast<std::size_t>(n_rep > 0 ? n_rep : 0));
  std::exception_ptr error = nullptr;
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < n_rep; ++r) {
    try {
      out[static_cast<std::size_t>(r)] = f(r);
    } catch (...) {
#pragma omp critical(sklab_replica_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace sklab
