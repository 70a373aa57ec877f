#include "cslab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "cslab/error.hpp"

namespace cslab {
namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans live for the lifetime of the process.
PlanPair plans_for(int n) {
  static std::map<int, PlanPair> cache;
  std::lock_guard lock(planner_mutex());
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  ComplexBuffer scratch(static_cast<std::size_t>(n) * n * n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  PlanPair p{fftw_plan_dft_3d(n, n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE),
             fftw_plan_dft_3d(n, n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE)};
  if (p.forward == nullptr || p.inverse == nullptr)
    throw ConfigError("FFTW failed to create a plan");
  cache.emplace(n, p);
  return p;
}

void execute(void* plan, std::span<Complex> data, int n) {
  const auto expected = static_cast<std::size_t>(n) * n * n;
  if (data.size() != expected) throw ConfigError("FFT buffer size does not match grid");
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  if (fftw_alignment_of(reinterpret_cast<double*>(buf)) == 0) {
    fftw_execute_dft(static_cast<fftw_plan>(plan), buf, buf);
    return;
  }
  ComplexBuffer tmp(data.begin(), data.end());
  auto* t = reinterpret_cast<fftw_complex*>(tmp.data());
  fftw_execute_dft(static_cast<fftw_plan>(plan), t, t);
  std::copy(tmp.begin(), tmp.end(), data.begin());
}

}  // namespace

Fft3::Fft3(int points_per_axis) : n_(points_per_axis) {
  auto p = plans_for(n_);
  forward_plan_ = p.forward;
  inverse_plan_ = p.inverse;
}

void Fft3::forward(std::span<Complex> data) const { execute(forward_plan_, data, n_); }

void Fft3::inverse(std::span<Complex> data) const {
  execute(inverse_plan_, data, n_);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

}  // namespace cslab
