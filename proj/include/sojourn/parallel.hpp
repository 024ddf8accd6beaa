#pragma once

// Worker pool and order-fixed reductions. The block partition depends only on
// the problem size, never on the worker count, so every sum is reproducible.

#include <cstddef>
#include <functional>
#include <vector>

#include "sojourn/common.hpp"

namespace sojourn::parallel {

inline constexpr std::size_t kBlock = 4096;

void set_worker_count(int workers);
int worker_count();

// Runs fn(b) for b in [0, nblocks). Blocks may execute on any worker.
void for_blocks(std::size_t nblocks, const std::function<void(std::size_t)>& fn);

inline std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

template <class T>
T pairwise_merge(std::vector<T>& parts) {
  if (parts.empty()) return T{};
  std::size_t len = parts.size();
  while (len > 1) {
    std::size_t half = (len + 1) / 2;
    for (std::size_t i = 0; i + half < len; ++i) parts[i] += parts[i + half];
    len = half;
  }
  return parts[0];
}

template <class T, class F>
T pairwise_range(std::size_t lo, std::size_t hi, const F& term) {
  if (hi - lo <= 16) {
    T acc{};
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    return acc;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_range<T>(lo, mid, term) + pairwise_range<T>(mid, hi, term);
}

// Deterministic sum of term(i), i in [0, n).
template <class T, class F>
T reduce_sum(std::size_t n, const F& term) {
  std::size_t nb = block_count(n);
  std::vector<T> parts(nb, T{});
  for_blocks(nb, [&](std::size_t b) {
    std::size_t lo = b * kBlock;
    std::size_t hi = std::min(n, lo + kBlock);
    parts[b] = pairwise_range<T>(lo, hi, term);
  });
  return pairwise_merge(parts);
}

// Pointwise loop over [0, n) split into the fixed blocks.
template <class F>
void for_range(std::size_t n, const F& body) {
  std::size_t nb = block_count(n);
  for_blocks(nb, [&](std::size_t b) {
    std::size_t lo = b * kBlock;
    std::size_t hi = std::min(n, lo + kBlock);
    for (std::size_t i = lo; i < hi; ++i) body(i);
  });
}

}  // namespace sojourn::parallel
