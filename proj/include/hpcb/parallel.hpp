#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace hpcb {

/// Worker count: HPC_BESOV_THREADS if set and positive, else the hardware count.
inline unsigned thread_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HPC_BESOV_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 256));
    } catch (const std::exception&) {
      // unparsable values fall back to the hardware count
    }
  }
  return hw;
}

namespace detail {
inline bool& inside_worker() {
  thread_local bool flag = false;
  return flag;
}
}  // namespace detail

/// Runs body(i) for i in [0, count). Work is handed out by index, so results that
/// are written per index do not depend on the thread count. The first exception
/// thrown by any body is rethrown on the calling thread. Nested calls from a
/// worker run serially.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), count));
  if (workers <= 1 || detail::inside_worker()) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;
  auto run = [&] {
    detail::inside_worker() = true;
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= count || error) return;
        i = next++;
      }
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

/// Ordered map over [0, count).
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, Fn&& fn) {
  std::vector<T> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

/// Sum of term(i) over [0, count), reduced in fixed chunks so the rounding is
/// the same for every thread count.
template <class Term>
double parallel_sum(std::size_t count, Term&& term, std::size_t chunk = 4096) {
  const std::size_t chunks = (count + chunk - 1) / chunk;
  const auto partial = parallel_map<double>(chunks, [&](std::size_t c) {
    double s = 0.0;
    const std::size_t hi = std::min(count, (c + 1) * chunk);
    for (std::size_t i = c * chunk; i < hi; ++i) s += term(i);
    return s;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

}  // namespace hpcb
