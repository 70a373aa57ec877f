#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <span>
#include <vector>

#include "cslab/grid.hpp"

namespace cslab {

using Complex = std::complex<double>;

/// Allocator returning SIMD-aligned storage so FFTW can run its planned
/// kernels directly on field buffers.
template <typename T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <typename U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}
  T* allocate(std::size_t n);
  void deallocate(T* p, std::size_t) noexcept;
  template <typename U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

void* fftw_aligned_alloc(std::size_t bytes);
void fftw_aligned_free(void* p) noexcept;

template <typename T>
T* FftwAllocator<T>::allocate(std::size_t n) {
  return static_cast<T*>(fftw_aligned_alloc(n * sizeof(T)));
}
template <typename T>
void FftwAllocator<T>::deallocate(T* p, std::size_t) noexcept {
  fftw_aligned_free(p);
}

using ComplexBuffer = std::vector<Complex, FftwAllocator<Complex>>;

enum class Domain { space, frequency };

/// Complex samples of u(t, .) on a grid, row-major with axis 0 slowest.
///
/// A frequency-domain field holds samples of the unitary Fourier transform
/// on the grid's frequency lattice, in FFT bin order.
class Field {
 public:
  Field() = default;
  explicit Field(Grid grid, double time = 0.0, Domain domain = Domain::space);

  const Grid& grid() const { return grid_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }
  Domain domain() const { return domain_; }
  void set_domain(Domain d) { domain_ = d; }

  std::size_t size() const { return values_.size(); }
  Complex& operator[](std::size_t i) { return values_[i]; }
  const Complex& operator[](std::size_t i) const { return values_[i]; }
  std::span<Complex> values() { return values_; }
  std::span<const Complex> values() const { return values_; }
  Complex* data() { return values_.data(); }
  const Complex* data() const { return values_.data(); }

  bool all_finite() const;

  /// Builds a field by evaluating fn(x, y, z) at every sample.
  template <typename Fn>
  static Field from_function(const Grid& grid, Fn&& fn, double time = 0.0) {
    Field f(grid, time);
    for_each_point(grid, [&](std::size_t idx, double x, double y, double z) {
      f.values_[idx] = fn(x, y, z);
    });
    return f;
  }

 private:
  Grid grid_;
  double time_ = 0.0;
  Domain domain_ = Domain::space;
  ComplexBuffer values_;
};

/// Real-valued samples on a grid (potentials, densities).
struct RealField {
  Grid grid;
  std::vector<double> values;
};

/// Pointwise |u|^2.
std::vector<double> density(const Field& u);

/// L^2 distance between two fields on the same grid.
double l2_distance(const Field& a, const Field& b);

}  // namespace cslab
