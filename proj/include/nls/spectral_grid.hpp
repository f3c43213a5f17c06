#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nls {

/// Periodic truncation [-L, L)^d of R^d with N points per axis.
///
/// Physical samples sit at x_j = -L + j h, h = 2L/N. Frequency-space
/// values are stored in FFT order: index i on an axis carries the integer
/// mode m = i for i < N/2 and m = i - N otherwise, with wavenumber
/// xi = pi m / L. The grid is immutable and cheap to copy; the |xi|^2
/// table is shared between copies.
class SpectralGrid {
 public:
  SpectralGrid(int dim, std::size_t n_per_axis, double half_width)
      : dim_(dim), n_(n_per_axis), half_width_(half_width) {
    if (dim < 1 || dim > 3) {
      throw std::invalid_argument("grid dimension must be 1, 2 or 3, got " +
                                  std::to_string(dim));
    }
    if (n_per_axis < 8 || (n_per_axis & (n_per_axis - 1)) != 0) {
      throw std::invalid_argument(
          "points per axis must be a power of two >= 8, got " +
          std::to_string(n_per_axis));
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw std::invalid_argument("half width must be positive and finite");
    }
    total_ = 1;
    for (int a = 0; a < dim_; ++a) total_ *= n_;

    auto k2 = std::make_shared<std::vector<double>>(total_);
    for (std::size_t flat = 0; flat < total_; ++flat) {
      const auto idx = unflatten(flat);
      double s = 0.0;
      for (int a = 0; a < dim_; ++a) {
        const double xi = wavenumber(idx[a]);
        s += xi * xi;
      }
      (*k2)[flat] = s;
    }
    k2_ = std::move(k2);
  }

  int dim() const { return dim_; }
  std::size_t n_per_axis() const { return n_; }
  double half_width() const { return half_width_; }
  std::size_t total_points() const { return total_; }

  /// Physical grid spacing h = 2L/N.
  double spacing() const { return 2.0 * half_width_ / static_cast<double>(n_); }
  /// Wavenumber lattice spacing pi/L.
  double lattice_spacing() const { return std::numbers::pi / half_width_; }
  /// h^d, the physical quadrature weight.
  double cell_volume() const { return std::pow(spacing(), dim_); }

  /// Integer mode carried by storage index i on one axis.
  long mode(std::size_t i) const {
    const auto half = static_cast<long>(n_ / 2);
    const auto ii = static_cast<long>(i);
    return ii < half ? ii : ii - static_cast<long>(n_);
  }
  double wavenumber(std::size_t i) const {
    return lattice_spacing() * static_cast<double>(mode(i));
  }
  double coordinate(std::size_t i) const {
    return -half_width_ + spacing() * static_cast<double>(i);
  }

  /// Per-axis wavenumbers in ascending order, m = -N/2 .. N/2-1.
  std::vector<double> axis_wavenumbers() const {
    std::vector<double> out(n_);
    const auto half = static_cast<long>(n_ / 2);
    for (std::size_t i = 0; i < n_; ++i) {
      out[i] = lattice_spacing() * static_cast<double>(static_cast<long>(i) - half);
    }
    return out;
  }

  /// Largest |xi| on the lattice, attained at the all-(-N/2) corner.
  double max_wavenumber_norm() const {
    return lattice_spacing() * static_cast<double>(n_ / 2) * std::sqrt(static_cast<double>(dim_));
  }
  /// Nyquist wavenumber pi N / (2L) along one axis.
  double axis_nyquist() const {
    return lattice_spacing() * static_cast<double>(n_ / 2);
  }

  std::array<std::size_t, 3> unflatten(std::size_t flat) const {
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
      idx[a] = flat % n_;
      flat /= n_;
    }
    return idx;
  }
  std::size_t flatten(const std::array<std::size_t, 3>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim_; ++a) flat = flat * n_ + idx[a];
    return flat;
  }

  /// |xi|^2 at a flat frequency index.
  double wavenumber_norm2(std::size_t flat) const { return (*k2_)[flat]; }
  const std::vector<double>& wavenumber_norm2_table() const { return *k2_; }

  /// |x|^2 at a flat physical index.
  double coordinate_norm2(std::size_t flat) const {
    const auto idx = unflatten(flat);
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) {
      const double x = coordinate(idx[a]);
      s += x * x;
    }
    return s;
  }

  friend bool operator==(const SpectralGrid& a, const SpectralGrid& b) {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.half_width_ == b.half_width_;
  }

 private:
  int dim_;
  std::size_t n_;
  double half_width_;
  std::size_t total_ = 0;
  std::shared_ptr<const std::vector<double>> k2_;
};

inline SpectralGrid make_grid(int dim, std::size_t n_per_axis, double half_width) {
  return SpectralGrid(dim, n_per_axis, half_width);
}

}  // namespace nls
