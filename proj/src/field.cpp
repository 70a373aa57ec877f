#include "cslab/field.hpp"

#include <fftw3.h>

#include <cmath>

#include "cslab/error.hpp"

namespace cslab {

void* fftw_aligned_alloc(std::size_t bytes) {
  void* p = fftw_malloc(bytes == 0 ? 1 : bytes);
  if (p == nullptr) throw std::bad_alloc();
  return p;
}

void fftw_aligned_free(void* p) noexcept { fftw_free(p); }

Field::Field(Grid grid, double time, Domain domain)
    : grid_(std::move(grid)), time_(time), domain_(domain), values_(grid_.size()) {}

bool Field::all_finite() const {
  for (const auto& v : values_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

std::vector<double> density(const Field& u) {
  std::vector<double> rho(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) rho[i] = std::norm(u[i]);
  return rho;
}

double l2_distance(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid()) || a.size() != b.size())
    throw ConfigError("l2_distance: fields live on different grids");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
  const double vol = a.domain() == Domain::space ? a.grid().cell_volume()
                                                 : a.grid().frequency_cell_volume();
  return std::sqrt(acc * vol);
}

}  // namespace cslab
