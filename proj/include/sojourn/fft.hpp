#pragma once

#include <cstddef>
#include <cstdlib>
#include <new>
#include <vector>

#include "sojourn/common.hpp"

namespace sojourn {

template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t kAlign = 64;
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n) {
    std::size_t bytes = ((n * sizeof(T) + kAlign - 1) / kAlign) * kAlign;
    void* p = std::aligned_alloc(kAlign, bytes == 0 ? kAlign : bytes);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) { std::free(p); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using ComplexBuffer = std::vector<cplx, AlignedAllocator<cplx>>;

// In-place unnormalized 3D DFT on an n^3 row-major array.
// direction -1: sum f_k e^{-2 pi i jk/n}; +1: e^{+2 pi i jk/n}.
// Plans are FFTW_ESTIMATE and shared, so results never depend on timing.
void fft3_inplace(int n, int direction, cplx* data);

}  // namespace sojourn
