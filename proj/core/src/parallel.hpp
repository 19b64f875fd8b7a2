#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace gsedit::detail {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

inline int clamp_bands(int total, int n_bands) {
  return std::max(1, std::min(n_bands, total));
}

inline void band_bounds(int total, int n_bands, int band, int& begin, int& end) {
  begin = static_cast<int>(static_cast<long long>(total) * band / n_bands);
  end = static_cast<int>(static_cast<long long>(total) * (band + 1) / n_bands);
}

// Splits [0, total) into n_bands contiguous bands and runs fn(band, begin, end).
// Banding is independent of the thread count, so per-band results merged in band
// order give identical floating-point output for any number of threads.
inline void parallel_bands(int total, int n_bands, int threads,
                           const std::function<void(int, int, int)>& fn) {
  if (total <= 0) return;
  n_bands = clamp_bands(total, n_bands);

  threads = resolve_threads(threads);
  if (threads <= 1 || n_bands == 1) {
    for (int b = 0; b < n_bands; ++b) {
      int begin, end;
      band_bounds(total, n_bands, b, begin, end);
      fn(b, begin, end);
    }
    return;
  }

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int b = next.fetch_add(1);
      if (b >= n_bands) return;
      int begin, end;
      band_bounds(total, n_bands, b, begin, end);
      fn(b, begin, end);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min(threads, n_bands);
  pool.reserve(n - 1);
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace gsedit::detail
