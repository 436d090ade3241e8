#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace snq {

inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Splits [0, reps) into fixed-size chunks and runs body(chunk_index, begin, end)
// across threads. Chunk boundaries do not depend on the thread count, so callers
// that store per-chunk results and reduce them in chunk order get bit-identical
// output for any --threads value.
inline void parallel_for_chunks(std::uint64_t reps, int threads,
                                const std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)>& body,
                                std::uint64_t chunk_size = 512) {
  if (reps == 0) return;
  const std::uint64_t n_chunks = (reps + chunk_size - 1) / chunk_size;
  const int n_threads = std::min<std::uint64_t>(resolve_threads(threads), n_chunks);
  if (n_threads <= 1) {
    for (std::uint64_t c = 0; c < n_chunks; ++c)
      body(c, c * chunk_size, std::min(reps, (c + 1) * chunk_size));
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks || failed.load()) return;
      try {
        body(c, c * chunk_size, std::min(reps, (c + 1) * chunk_size));
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failed.load()) std::rethrow_exception(error);
}

}  // namespace snq
