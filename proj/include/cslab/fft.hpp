#pragma once

#include <span>

#include "cslab/field.hpp"

namespace cslab {

/// Unnormalized in-place 3-D FFT on an N^3 buffer (FFTW conventions:
/// forward uses e^{-2 pi i jk/N}, inverse e^{+2 pi i jk/N}, no scaling).
///
/// Plans are created once per N and shared; execution on distinct buffers
/// is safe from several threads.
class Fft3 {
 public:
  explicit Fft3(int points_per_axis);

  void forward(std::span<Complex> data) const;
  /// Inverse transform including the 1/N^3 normalization.
  void inverse(std::span<Complex> data) const;

  int points_per_axis() const { return n_; }

 private:
  int n_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace cslab
