#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace tamed {

// Samples per work unit. Fixed so that the partition, and therefore every
// floating-point sum, is independent of the worker count.
inline constexpr std::size_t kChunkSamples = 32;

inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Splits [0, n) into fixed chunks, evaluates work(begin, end) -> Acc on up to
// `workers` threads, and folds the partial results into `total` strictly in
// chunk order. The result depends only on n and the work function.
template <class Acc, class Work, class Merge>
Acc ordered_reduce(std::size_t n, unsigned workers, Acc total, Work work, Merge merge) {
  const std::size_t chunks = (n + kChunkSamples - 1) / kChunkSamples;
  if (chunks == 0) return total;
  const unsigned threads = std::max(1u, std::min<unsigned>(resolve_workers(workers),
                                                           static_cast<unsigned>(chunks)));

  std::vector<std::optional<Acc>> pending(chunks);
  std::size_t next_to_merge = 0;
  std::atomic<std::size_t> next_chunk{0};
  std::mutex mutex;
  std::exception_ptr failure;

  auto body = [&] {
    for (;;) {
      const std::size_t c = next_chunk.fetch_add(1);
      if (c >= chunks) return;
      {
        std::lock_guard lock(mutex);
        if (failure) return;
      }
      try {
        const std::size_t begin = c * kChunkSamples;
        const std::size_t end = std::min(n, begin + kChunkSamples);
        Acc part = work(begin, end);
        std::lock_guard lock(mutex);
        pending[c] = std::move(part);
        while (next_to_merge < chunks && pending[next_to_merge]) {
          merge(total, std::move(*pending[next_to_merge]));
          pending[next_to_merge].reset();
          ++next_to_merge;
        }
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  if (threads == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return total;
}

}  // namespace tamed
