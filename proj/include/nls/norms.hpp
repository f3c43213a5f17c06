#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>

#include "nls/complex_field.hpp"
#include "nls/fft.hpp"

namespace nls {

struct L2 {};
/// L^r, r in [1, inf]; r = infinity gives the max norm.
struct Lr {
  double r;
};
/// Sobolev H^s, weight (1 + |xi|^2)^s on |phi_hat|^2.
struct Hs {
  double s;
};
/// Logarithmic Sobolev H^s_log, weight (log(2 + |xi|))^{2s}.
struct HlogS {
  double s;
};

using NormKind = std::variant<L2, Lr, Hs, HlogS>;

inline constexpr double infinity = std::numeric_limits<double>::infinity();

namespace detail {

inline double l2_sum(const ComplexBuffer& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

inline double lr_norm(const ComplexField& f, double r) {
  const auto& v = f.values();
  if (std::isinf(r)) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
  }
  if (r == 2.0) return std::sqrt(f.grid().cell_volume() * l2_sum(v));
  // Scale by the max modulus so large r cannot overflow.
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& z : v) s += std::pow(std::abs(z) / m, r);
  return m * std::pow(f.grid().cell_volume() * s, 1.0 / r);
}

// Frequency-side norms. With the unitary transform, h^d sum |c|^2 equals
// the Riemann sum of |phi_hat|^2 over the lattice with cell (pi/L)^d, so
// the zero-weight case reproduces L2.
template <class Weight>
double weighted_frequency_norm(const ComplexField& f, Weight&& w) {
  const ComplexField c = in_space(f, Space::frequency);
  const auto& g = c.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += w(g.wavenumber_norm2(i)) * std::norm(c[i]);
  return std::sqrt(g.cell_volume() * s);
}

}  // namespace detail

/// Discrete norms of a field. L2 and Lr use physical values (transforming
/// if needed); Hs and HlogS use frequency coefficients.
inline double norm(const ComplexField& f, const NormKind& kind) {
  return std::visit(
      [&f](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, L2>) {
          // Parseval: either space gives the same sum.
          return std::sqrt(f.grid().cell_volume() * detail::l2_sum(f.values()));
        } else if constexpr (std::is_same_v<K, Lr>) {
          if (!(k.r >= 1.0)) throw std::invalid_argument("L^r norm needs r >= 1");
          if (f.space() == Space::physical) return detail::lr_norm(f, k.r);
          return detail::lr_norm(in_space(f, Space::physical), k.r);
        } else if constexpr (std::is_same_v<K, Hs>) {
          if (!(k.s >= 0.0)) throw std::invalid_argument("H^s norm needs s >= 0");
          if (k.s == 0.0) return detail::weighted_frequency_norm(f, [](double) { return 1.0; });
          return detail::weighted_frequency_norm(
              f, [s = k.s](double k2) { return std::pow(1.0 + k2, s); });
        } else {
          if (!(k.s >= 0.0)) throw std::invalid_argument("H^s_log norm needs s >= 0");
          return detail::weighted_frequency_norm(f, [s = k.s](double k2) {
            return std::pow(std::log(2.0 + std::sqrt(k2)), 2.0 * s);
          });
        }
      },
      kind);
}

inline double l2_norm(const ComplexField& f) { return norm(f, L2{}); }

/// L2 distance between two fields on the same grid (any spaces).
inline double l2_distance(const ComplexField& a, const ComplexField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("fields live on different grids");
  if (a.space() == b.space()) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(a.grid().cell_volume() * s);
  }
  return l2_distance(a, in_space(b, a.space()));
}

}  // namespace nls
