#pragma once

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "nls/complex_field.hpp"

namespace nls {

namespace detail {

/// Process-wide cache of in-place FFTW plans. Plan creation is serialized;
/// execution goes through fftw_execute_dft, which FFTW documents as
/// thread-safe.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, std::size_t n, int sign) {
    const auto key = std::make_tuple(dim, n, sign);
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= n;
    ComplexBuffer scratch(total);
    int dims[3] = {static_cast<int>(n), static_cast<int>(n), static_cast<int>(n)};
    auto* data = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft(dim, dims, data, data, sign, FFTW_ESTIMATE);
    if (plan == nullptr) throw std::runtime_error("FFTW plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans_;
};

/// (-1)^(i_1 + ... + i_d): the phase e^{-i xi x_0} that moves the FFT
/// origin from x = -L to the grid's left edge.
inline double checkerboard_sign(const SpectralGrid& g, std::size_t flat) {
  const auto idx = g.unflatten(flat);
  return ((idx[0] + idx[1] + idx[2]) & 1U) ? -1.0 : 1.0;
}

inline void apply_sign_and_scale(const SpectralGrid& g, ComplexBuffer& v, double scale) {
  const std::size_t n = g.n_per_axis();
  const std::size_t total = v.size();
  // Rows along the last axis alternate sign; the row parity flips with the
  // other indices, so walk rows and keep the running parity.
  for (std::size_t row = 0; row < total; row += n) {
    const double s0 = checkerboard_sign(g, row) * scale;
    for (std::size_t i = 0; i < n; i += 2) {
      v[row + i] *= s0;
      v[row + i + 1] *= -s0;
    }
  }
}

/// Bare FFTW transforms, no sign or scale.
inline void raw_forward_inplace(const SpectralGrid& g, ComplexBuffer& v) {
  auto* data = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(PlanCache::instance().get(g.dim(), g.n_per_axis(), FFTW_FORWARD), data, data);
}

inline void raw_inverse_inplace(const SpectralGrid& g, ComplexBuffer& v) {
  auto* data = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(PlanCache::instance().get(g.dim(), g.n_per_axis(), FFTW_BACKWARD), data, data);
}

/// Unitary forward transform in place. Coefficient at xi is
/// M^{-1/2} sum_j u_j exp(-i xi . x_j) with x_j measured from the origin.
inline void forward_inplace(const SpectralGrid& g, ComplexBuffer& v) {
  auto* data = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(PlanCache::instance().get(g.dim(), g.n_per_axis(), FFTW_FORWARD), data, data);
  apply_sign_and_scale(g, v, 1.0 / std::sqrt(static_cast<double>(g.total_points())));
}

inline void inverse_inplace(const SpectralGrid& g, ComplexBuffer& v) {
  apply_sign_and_scale(g, v, 1.0 / std::sqrt(static_cast<double>(g.total_points())));
  auto* data = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(PlanCache::instance().get(g.dim(), g.n_per_axis(), FFTW_BACKWARD), data, data);
}

inline void to_frequency(ComplexField& f) {
  if (f.space() == Space::frequency) return;
  forward_inplace(f.grid(), f.values());
  f.set_space(Space::frequency);
}

inline void to_physical(ComplexField& f) {
  if (f.space() == Space::physical) return;
  inverse_inplace(f.grid(), f.values());
  f.set_space(Space::physical);
}

}  // namespace detail

/// Physical -> frequency, unitary normalization.
inline ComplexField forward_transform(ComplexField f) {
  if (f.space() != Space::physical) {
    throw std::invalid_argument("forward_transform expects a physical-space field");
  }
  detail::to_frequency(f);
  return f;
}

/// Frequency -> physical, unitary normalization.
inline ComplexField inverse_transform(ComplexField f) {
  if (f.space() != Space::frequency) {
    throw std::invalid_argument("inverse_transform expects a frequency-space field");
  }
  detail::to_physical(f);
  return f;
}

inline ComplexField in_space(ComplexField f, Space s) {
  if (s == Space::frequency) {
    detail::to_frequency(f);
  } else {
    detail::to_physical(f);
  }
  return f;
}

}  // namespace nls
