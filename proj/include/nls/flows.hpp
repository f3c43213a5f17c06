#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "nls/complex_field.hpp"
#include "nls/fft.hpp"

namespace nls {

/// Smooth radial cutoff profile: 1 on [0, 1], 0 on [2, inf), and the
/// exp-mollifier bridge g(2-r) / (g(2-r) + g(r-1)) with g(t) = exp(-1/t)
/// in between. Symmetric about r = 1.5.
inline double chi(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double a = std::exp(-1.0 / (2.0 - r));
  const double b = std::exp(-1.0 / (r - 1.0));
  return a / (a + b);
}

/// Precomputed multiplier chi(scale^{1/2} |xi|) on a grid's frequency
/// lattice (FFT order).
class FilterKernel {
 public:
  FilterKernel(SpectralGrid grid, double scale) : grid_(std::move(grid)), scale_(scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw std::invalid_argument("filter scale must be positive");
    }
    auto w = std::make_shared<std::vector<double>>(grid_.total_points());
    const double root = std::sqrt(scale);
    all_pass_ = true;
    for (std::size_t i = 0; i < w->size(); ++i) {
      (*w)[i] = chi(root * std::sqrt(grid_.wavenumber_norm2(i)));
      all_pass_ = all_pass_ && (*w)[i] == 1.0;
    }
    weights_ = std::move(w);
  }

  const SpectralGrid& grid() const { return grid_; }
  double scale() const { return scale_; }
  const std::vector<double>& weights() const { return *weights_; }
  double weight(std::size_t flat) const { return (*weights_)[flat]; }
  /// True when every lattice weight is exactly one.
  bool all_pass() const { return all_pass_; }

 private:
  SpectralGrid grid_;
  double scale_;
  std::shared_ptr<const std::vector<double>> weights_;
  bool all_pass_ = false;
};

inline FilterKernel make_filter(const SpectralGrid& grid, double scale) {
  return FilterKernel(grid, scale);
}

namespace detail {

/// u <- exp(-i t lambda |u|^p) u, pointwise.
inline void nonlinear_phase_inplace(ComplexBuffer& v, double t, double lambda, double p) {
  const double c = -t * lambda;
  if (c == 0.0) return;
  if (p == 2.0) {
    for (auto& z : v) z *= std::polar(1.0, c * std::norm(z));
  } else if (p == 1.0) {
    for (auto& z : v) z *= std::polar(1.0, c * std::abs(z));
  } else {
    const double half_p = 0.5 * p;
    for (auto& z : v) z *= std::polar(1.0, c * std::pow(std::norm(z), half_p));
  }
}

/// |u|^p with the same branch structure as the phase above.
inline double modulus_power(Complex z, double p) {
  if (p == 2.0) return std::norm(z);
  if (p == 1.0) return std::abs(z);
  return std::pow(std::norm(z), 0.5 * p);
}

inline void linear_phase_inplace(const SpectralGrid& g, ComplexBuffer& v, double t) {
  if (t == 0.0) return;
  const auto& k2 = g.wavenumber_norm2_table();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::polar(1.0, -t * k2[i]);
}

inline void check_same_grid(const SpectralGrid& a, const SpectralGrid& b) {
  if (!(a == b)) throw std::invalid_argument("field and kernel live on different grids");
}

}  // namespace detail

/// P(s) f: frequency-space multiply by the kernel weights. The output has
/// the same space tag as the input.
inline ComplexField apply_filter(ComplexField f, const FilterKernel& k) {
  detail::check_same_grid(f.grid(), k.grid());
  const Space original = f.space();
  detail::to_frequency(f);
  const auto& w = k.weights();
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= w[i];
  return in_space(std::move(f), original);
}

/// S(t) f = e^{it Delta} f, i.e. multiply by e^{-it|xi|^2}. Valid for
/// either sign of t. Output keeps the input's space tag.
inline ComplexField linear_flow(ComplexField f, double t) {
  if (t == 0.0) return f;
  const Space original = f.space();
  detail::to_frequency(f);
  detail::linear_phase_inplace(f.grid(), f.values(), t);
  return in_space(std::move(f), original);
}

/// N(t) f = exp(-i t lambda |f|^p) f, pointwise in physical space.
inline ComplexField nonlinear_flow(ComplexField f, double t, double lambda, double p) {
  if (f.space() != Space::physical) {
    throw std::invalid_argument("nonlinear_flow expects a physical-space field");
  }
  if (!(p > 0.0)) throw std::invalid_argument("nonlinearity exponent p must be positive");
  detail::nonlinear_phase_inplace(f.values(), t, lambda, p);
  return f;
}

/// (-Delta)^{sigma/2} f as the multiplier |xi|^sigma.
inline ComplexField fractional_laplacian(ComplexField f, double sigma) {
  const Space original = f.space();
  detail::to_frequency(f);
  const auto& k2 = f.grid().wavenumber_norm2_table();
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= std::pow(k2[i], 0.5 * sigma);
  return in_space(std::move(f), original);
}

}  // namespace nls
