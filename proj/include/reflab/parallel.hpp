#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace reflab {

/// Splits [0, n) into fixed chunks, evaluates `work(begin, end)` for each
/// chunk on up to `jobs` threads and returns the results in chunk order.
/// Chunk boundaries do not depend on `jobs`, so any ordered reduction of
/// the results is identical for every worker count.
template <typename Work>
auto run_chunks(std::uint64_t n, int jobs, std::uint64_t chunk, Work&& work)
    -> std::vector<decltype(work(std::uint64_t{}, std::uint64_t{}))> {
  using R = decltype(work(std::uint64_t{}, std::uint64_t{}));
  chunk = std::max<std::uint64_t>(1, chunk);
  const std::uint64_t count = (n + chunk - 1) / chunk;
  std::vector<R> results(count);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= count) return;
      try {
        results[c] = work(c * chunk, std::min(n, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
        return;
      }
    }
  };
  const int threads = static_cast<int>(std::min<std::uint64_t>(std::max(1, jobs), std::max<std::uint64_t>(1, count)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace reflab
