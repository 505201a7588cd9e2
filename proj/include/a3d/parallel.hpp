#ifndef A3D_PARALLEL_HPP
#define A3D_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace a3d {

//! Resolves a requested worker count; 0 means "one per hardware thread".
inline unsigned resolve_jobs(unsigned jobs) {
  if (jobs == 0) {
    jobs = std::max(1u, std::thread::hardware_concurrency());
  }
  return jobs;
}

//! Calls fn(begin, end) over disjoint contiguous chunks of [0, count).
//! Chunks never overlap, so callers writing only to their own rows need no
//! synchronization. The first exception thrown by any worker is rethrown.
template <typename Fn>
void parallel_for_rows(std::size_t count, unsigned jobs, Fn&& fn) {
  jobs = resolve_jobs(jobs);
  const std::size_t workers =
      std::min<std::size_t>(jobs, std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(count, w * chunk);
      const std::size_t end = std::min(count, begin + chunk);
      threads.emplace_back([&, w, begin, end] {
        try {
          fn(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace a3d

#endif  // A3D_PARALLEL_HPP
