#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace saomre {

enum class Execution { Serial, Parallel };

inline void set_worker_count(int workers) {
#ifdef _OPENMP
  if (workers > 0) omp_set_num_threads(workers);
#else
  (void)workers;
#endif
}

inline int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Runs fn(t) for t in [0, count) and returns the results in index order.
/// Each slot is written by exactly one iteration, so the output does not depend
/// on the schedule. A replicate that throws E leaves its slot empty; any other
/// exception is rethrown after the loop.
template <typename E, typename Fn>
auto run_replicates(std::size_t count, Fn&& fn, Execution mode)
    -> std::vector<std::optional<decltype(fn(std::size_t{}))>> {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> out(count);
  std::vector<std::exception_ptr> fatal(count);

  auto body = [&](std::size_t t) {
    try {
      out[t].emplace(fn(t));
    } catch (const E&) {
      // counted by the caller as an empty slot
    } catch (...) {
      fatal[t] = std::current_exception();
    }
  };

  if (mode == Execution::Parallel) {
    const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 4)
    for (long long t = 0; t < n; ++t) body(static_cast<std::size_t>(t));
  } else {
    for (std::size_t t = 0; t < count; ++t) body(t);
  }

  for (auto& e : fatal)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace saomre
