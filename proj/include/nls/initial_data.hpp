#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nls/complex_field.hpp"
#include "nls/fft.hpp"
#include "nls/norms.hpp"

namespace nls {

struct GaussianSpec {
  double width = 1.0;
  double amplitude = 1.0;
};
struct PlaneWaveSpec {
  std::vector<long> mode;  // integer lattice mode per axis
  double amplitude = 1.0;
};
struct HsRoughSpec {
  double s = 0.0;
  std::uint64_t seed = 0;
  double normalization = 1.0;
};
struct PhiAlphaSpec {
  double alpha = 1.0;
  double normalization = 1.0;
};

using DataSpec = std::variant<GaussianSpec, PlaneWaveSpec, HsRoughSpec, PhiAlphaSpec>;

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; platform independent,
/// unlike std::uniform_real_distribution.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Flat index of the lattice point -m (modulo N) for a frequency index.
inline std::size_t mirror_index(const SpectralGrid& g, std::size_t flat) {
  auto idx = g.unflatten(flat);
  const std::size_t n = g.n_per_axis();
  for (int a = 0; a < g.dim(); ++a) idx[a] = (n - idx[a]) % n;
  return g.flatten(idx);
}

inline std::vector<long> checked_mode(const SpectralGrid& g, const std::vector<long>& mode) {
  if (mode.size() != static_cast<std::size_t>(g.dim())) {
    throw std::invalid_argument("plane-wave mode needs one integer per axis");
  }
  const long half = static_cast<long>(g.n_per_axis() / 2);
  for (long m : mode) {
    if (m < -half || m >= half) throw std::invalid_argument("plane-wave mode outside the grid lattice");
  }
  return mode;
}

inline void normalize_to(ComplexField& f, double normalization) {
  if (!(normalization > 0.0)) throw std::invalid_argument("normalization must be positive");
  const double current = l2_norm(f);
  if (current == 0.0) throw std::invalid_argument("cannot normalize a zero field");
  f *= Complex(normalization / current, 0.0);
}

}  // namespace detail

/// A exp(-|x|^2 / w^2).
inline ComplexField gaussian(const SpectralGrid& grid, double width, double amplitude) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian width must be positive");
  ComplexField f(grid, Space::physical);
  const double inv_w2 = 1.0 / (width * width);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = amplitude * std::exp(-grid.coordinate_norm2(i) * inv_w2);
  }
  return f;
}

/// Exact NLS solution through a plane wave: A exp(i(xi.x - (|xi|^2 + lambda A^p) t)),
/// xi = pi m / L. |u| is constant, so both split flows act on it exactly.
inline ComplexField exact_plane_wave(const SpectralGrid& grid, const std::vector<long>& mode,
                                     double amplitude, double lambda, double p, double t) {
  const auto m = detail::checked_mode(grid, mode);
  if (!(amplitude > 0.0)) throw std::invalid_argument("plane-wave amplitude must be positive");
  double xi2 = 0.0;
  std::vector<double> xi(m.size());
  for (std::size_t a = 0; a < m.size(); ++a) {
    xi[a] = grid.lattice_spacing() * static_cast<double>(m[a]);
    xi2 += xi[a] * xi[a];
  }
  const double omega = xi2 + lambda * std::pow(amplitude, p);
  ComplexField f(grid, Space::physical);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto idx = grid.unflatten(i);
    double phase = -omega * t;
    for (int a = 0; a < grid.dim(); ++a) phase += xi[a] * grid.coordinate(idx[a]);
    f[i] = std::polar(amplitude, phase);
  }
  return f;
}

inline ComplexField plane_wave(const SpectralGrid& grid, const std::vector<long>& mode,
                               double amplitude) {
  return exact_plane_wave(grid, mode, amplitude, 0.0, 1.0, 0.0);
}

/// |phi_hat(xi)| = (1+|xi|)^{-(s+d/2)} (log(2+|xi|))^{-1} with seeded uniform
/// phases, conjugate-symmetric so the physical field is real. Unnormalized,
/// frequency space.
inline ComplexField hs_rough_spectrum(const SpectralGrid& grid, double s, std::uint64_t seed) {
  if (!(s >= 0.0)) throw std::invalid_argument("hs_rough needs s >= 0");
  std::mt19937_64 rng(seed);
  ComplexField f(grid, Space::frequency);
  std::vector<char> done(f.size(), 0);
  const double decay = s + 0.5 * grid.dim();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (done[i]) continue;
    const double k = std::sqrt(grid.wavenumber_norm2(i));
    const double amp = std::pow(1.0 + k, -decay) / std::log(2.0 + k);
    const std::size_t j = detail::mirror_index(grid, i);
    if (j == i) {
      f[i] = amp;
    } else {
      const double theta = 2.0 * std::numbers::pi * detail::unit_uniform(rng);
      f[i] = std::polar(amp, theta);
      f[j] = std::conj(f[i]);
      done[j] = 1;
    }
    done[i] = 1;
  }
  return f;
}

/// Real datum in H^s but in no H^{s+delta}, scaled to the given L2 norm.
inline ComplexField hs_rough(const SpectralGrid& grid, double s, std::uint64_t seed,
                             double normalization) {
  ComplexField f = hs_rough_spectrum(grid, s, seed);
  detail::normalize_to(f, normalization);
  detail::to_physical(f);
  // The spectrum is conjugate-symmetric; drop the roundoff imaginary part.
  for (auto& z : f.values()) z = Complex(z.real(), 0.0);
  return f;
}

/// phi_hat_alpha(xi) = (1+|xi|)^{-d/2} (log(2+|xi|))^{-(1+alpha)/2}, unnormalized.
inline ComplexField phi_alpha_spectrum(const SpectralGrid& grid, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("phi_alpha needs alpha > 0");
  ComplexField f(grid, Space::frequency);
  const double a = -0.5 * grid.dim();
  const double b = -0.5 * (1.0 + alpha);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double k = std::sqrt(grid.wavenumber_norm2(i));
    f[i] = std::pow(1.0 + k, a) * std::pow(std::log(2.0 + k), b);
  }
  return f;
}

/// Radial L2 datum outside every H^s, s > 0, scaled to the given L2 norm.
inline ComplexField phi_alpha(const SpectralGrid& grid, double alpha, double normalization) {
  ComplexField f = phi_alpha_spectrum(grid, alpha);
  detail::normalize_to(f, normalization);
  detail::to_physical(f);
  for (auto& z : f.values()) z = Complex(z.real(), 0.0);
  return f;
}

inline ComplexField realize(const SpectralGrid& grid, const DataSpec& spec) {
  return std::visit(
      [&grid](const auto& d) -> ComplexField {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, GaussianSpec>) {
          return gaussian(grid, d.width, d.amplitude);
        } else if constexpr (std::is_same_v<D, PlaneWaveSpec>) {
          return plane_wave(grid, d.mode, d.amplitude);
        } else if constexpr (std::is_same_v<D, HsRoughSpec>) {
          return hs_rough(grid, d.s, d.seed, d.normalization);
        } else {
          return phi_alpha(grid, d.alpha, d.normalization);
        }
      },
      spec);
}

inline std::string kind_name(const DataSpec& spec) {
  static const char* names[] = {"gaussian", "plane_wave", "hs_rough", "phi_alpha"};
  return names[spec.index()];
}

/// Rough data get the looser oracle ceiling.
inline bool is_rough(const DataSpec& spec) {
  return std::holds_alternative<HsRoughSpec>(spec) || std::holds_alternative<PhiAlphaSpec>(spec);
}

}  // namespace nls
