#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace sparsevine {

//! Runs f(0), ..., f(n - 1) on up to `threads` workers. Work is split into
//! contiguous blocks; the first exception thrown by any task is rethrown.
template<class F>
void parallel_for(int n, int threads, F&& f)
{
  if (n <= 0)
    return;
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i)
      f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    int begin = n * w / threads;
    int end = n * (w + 1) / threads;
    pool.emplace_back([&, w, begin, end] {
      try {
        for (int i = begin; i < end; ++i)
          f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool)
    t.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

} // namespace sparsevine
