#pragma once

// Order-preserving parallel map. Work items are claimed from an atomic
// counter, results land in a pre-sized vector at their input index, so output
// order never depends on scheduling. Exceptions are captured and rethrown on
// the calling thread after all workers join.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace tabletalk {

template <typename Result>
std::vector<Result> parallel_map(std::size_t count, int jobs,
                                 const std::function<Result(std::size_t)>& fn) {
  std::vector<Result> results(count);
  if (count == 0) return results;
  if (jobs < 1) jobs = 1;
  std::size_t workers = std::min(static_cast<std::size_t>(jobs), count);

  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= count) return;
          results[i] = fn(i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace tabletalk
