#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <thread>
#include <vector>

namespace orec::detail {

// Runs body(begin, end) over fixed-size chunks of [0, n). Chunk boundaries do
// not depend on the thread count, so per-chunk results are reproducible.
template <typename Body>
void for_chunks(std::size_t n, std::size_t chunk, Body&& body) {
  if (n == 0) return;
  const std::size_t chunks = (n + chunk - 1) / chunk;
  const std::size_t workers =
      std::min<std::size_t>(chunks, std::max(1u, std::thread::hardware_concurrency()));
  auto run = [&](std::size_t first) {
    for (std::size_t c = first; c < chunks; c += workers)
      body(c, c * chunk, std::min(n, (c + 1) * chunk));
  };
  if (workers == 1) {
    run(0);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
}

template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  for_chunks(n, 4096, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) body(i);
  });
}

/// Sum of f(i) over [0, n); bit-identical for any thread count.
template <typename F>
double deterministic_sum(std::size_t n, F&& f) {
  constexpr std::size_t kChunk = 4096;
  std::vector<double> partial((n + kChunk - 1) / kChunk, 0.0);
  for_chunks(n, kChunk, [&](std::size_t c, std::size_t b, std::size_t e) {
    double s = 0.0, comp = 0.0;  // Neumaier
    for (std::size_t i = b; i < e; ++i) {
      const double v = f(i);
      const double t = s + v;
      comp += (std::abs(s) >= std::abs(v)) ? (s - t) + v : (v - t) + s;
      s = t;
    }
    partial[c] = s + comp;
  });
  // pairwise combine
  while (partial.size() > 1) {
    std::vector<double> next((partial.size() + 1) / 2);
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = partial[2 * i] + (2 * i + 1 < partial.size() ? partial[2 * i + 1] : 0.0);
    partial.swap(next);
  }
  return partial.empty() ? 0.0 : partial[0];
}

}  // namespace orec::detail
