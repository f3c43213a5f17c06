#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "nls/flows.hpp"
#include "nls/initial_data.hpp"
#include "nls/norms.hpp"

namespace nls {

// Empirical check of the frequency-multiplier bounds for P(s):
//   tail:       ||phi - P phi||_r      <= C s^{sigma/2} ||(-Delta)^{sigma/2} phi||_r
//   bounded:    ||P phi||_r            <= C ||phi||_r
//   derivative: ||(-Delta)^{sigma/2} P phi||_r <= C s^{-sigma/2} ||phi||_r
//   lq_to_lr:   ||P phi||_r            <= C s^{(d/2)(1/r - 1/q)} ||phi||_q,  q <= r
//
// For each scale s the fitted constant is the largest ratio over the random
// fields; the bound is scale-invariant when it is stable across the sweep.
// Test fields are band-limited to |xi| <= B s^{-1/2} with B drawn per field
// and carry a spatial envelope of width ~ s^{1/2}, so the family dilates
// with s the way the inequalities do.

struct BernsteinCheck {
  std::string inequality;
  double r = 0.0;
  double q = 0.0;      // lq_to_lr only
  double sigma = 0.0;  // tail / derivative only
  std::vector<double> scales;
  std::vector<double> constants;
  /// max / min of the fitted constants over the sweep.
  double spread = 0.0;
  bool pass = false;
};

struct BernsteinOptions {
  std::vector<double> scales;
  int fields_per_scale = 200;
  std::uint64_t seed = 1;
  double band_min = 0.5;
  double band_max = 3.0;
  double max_spread = 2.0;
  /// Envelope width in units of s^{1/2}.
  double envelope = 4.0;
};

namespace detail {

inline double gaussian_draw(std::mt19937_64& rng) {
  // Box-Muller on platform-independent uniforms.
  const double u1 = 1.0 - unit_uniform(rng);
  const double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Complex Gaussian spectrum on |xi| <= cutoff, localized in space by the
/// envelope exp(-|x|^2 / width^2) and then cut back to |xi| <= 2 cutoff.
/// Both lengths scale like s^{1/2}, so the family is dilation covariant
/// and box-filling fields (which never saturate the Lq -> Lr bound) are
/// avoided.
inline ComplexField random_band_limited(const SpectralGrid& grid, double cutoff, double width,
                                        std::mt19937_64& rng) {
  ComplexField f(grid, Space::frequency);
  const double c2 = cutoff * cutoff;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double re = gaussian_draw(rng);
    const double im = gaussian_draw(rng);
    f[i] = grid.wavenumber_norm2(i) <= c2 ? Complex(re, im) : Complex(0.0, 0.0);
  }
  to_physical(f);
  const double inv_w2 = 1.0 / (width * width);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= std::exp(-grid.coordinate_norm2(i) * inv_w2);
  to_frequency(f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (grid.wavenumber_norm2(i) > 4.0 * c2) f[i] = 0.0;
  }
  return f;
}

inline ComplexField multiply_spectrum(const ComplexField& freq, const std::vector<double>& w) {
  ComplexField out = freq;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= w[i];
  return out;
}

}  // namespace detail

inline std::vector<BernsteinCheck> bernstein_suite(const SpectralGrid& grid,
                                                   const BernsteinOptions& opt) {
  const std::vector<double> rs = {2.0, 4.0, infinity};
  const std::vector<double> qs = {2.0, 4.0};
  const std::vector<double> sigmas = {1.0, 2.0};
  const double d = grid.dim();

  std::vector<BernsteinCheck> checks;
  for (double r : rs) {
    for (double sigma : sigmas) checks.push_back({"tail", r, 0.0, sigma, {}, {}, 0.0, false});
    checks.push_back({"bounded", r, 0.0, 0.0, {}, {}, 0.0, false});
    for (double sigma : sigmas) checks.push_back({"derivative", r, 0.0, sigma, {}, {}, 0.0, false});
    for (double q : qs) {
      if (q <= r) checks.push_back({"lq_to_lr", r, q, 0.0, {}, {}, 0.0, false});
    }
  }

  std::mt19937_64 rng(opt.seed);
  std::vector<double> abs_xi_sigma[2];
  for (int k = 0; k < 2; ++k) {
    abs_xi_sigma[k].resize(grid.total_points());
    for (std::size_t i = 0; i < grid.total_points(); ++i) {
      abs_xi_sigma[k][i] = std::pow(grid.wavenumber_norm2(i), 0.5 * sigmas[k]);
    }
  }

  for (double s : opt.scales) {
    const FilterKernel kernel(grid, s);
    std::vector<double> worst(checks.size(), 0.0);
    for (int field = 0; field < opt.fields_per_scale; ++field) {
      const double band = opt.band_min + (opt.band_max - opt.band_min) * detail::unit_uniform(rng);
      const ComplexField hat =
          detail::random_band_limited(grid, band / std::sqrt(s), opt.envelope * std::sqrt(s), rng);
      const ComplexField filtered_hat = detail::multiply_spectrum(hat, kernel.weights());

      const ComplexField phi = inverse_transform(hat);
      const ComplexField pphi = inverse_transform(filtered_hat);
      const ComplexField rest = phi - pphi;
      ComplexField dphi[2] = {inverse_transform(detail::multiply_spectrum(hat, abs_xi_sigma[0])),
                              inverse_transform(detail::multiply_spectrum(hat, abs_xi_sigma[1]))};
      ComplexField dpphi[2] = {
          inverse_transform(detail::multiply_spectrum(filtered_hat, abs_xi_sigma[0])),
          inverse_transform(detail::multiply_spectrum(filtered_hat, abs_xi_sigma[1]))};

      auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
      for (std::size_t c = 0; c < checks.size(); ++c) {
        const auto& ch = checks[c];
        const Lr lr{ch.r};
        const int si = ch.sigma == 2.0 ? 1 : 0;
        double value = 0.0;
        if (ch.inequality == "tail") {
          value = ratio(norm(rest, lr), std::pow(s, 0.5 * ch.sigma) * norm(dphi[si], lr));
        } else if (ch.inequality == "bounded") {
          value = ratio(norm(pphi, lr), norm(phi, lr));
        } else if (ch.inequality == "derivative") {
          value = ratio(norm(dpphi[si], lr), std::pow(s, -0.5 * ch.sigma) * norm(phi, lr));
        } else {
          const double inv_r = std::isinf(ch.r) ? 0.0 : 1.0 / ch.r;
          value = ratio(norm(pphi, lr), std::pow(s, 0.5 * d * (inv_r - 1.0 / ch.q)) * norm(phi, Lr{ch.q}));
        }
        worst[c] = std::max(worst[c], value);
      }
    }
    for (std::size_t c = 0; c < checks.size(); ++c) {
      checks[c].scales.push_back(s);
      checks[c].constants.push_back(worst[c]);
    }
  }

  for (auto& ch : checks) {
    const auto [lo, hi] = std::minmax_element(ch.constants.begin(), ch.constants.end());
    const bool finite = std::all_of(ch.constants.begin(), ch.constants.end(),
                                    [](double c) { return std::isfinite(c) && c > 0.0; });
    ch.spread = finite ? *hi / *lo : infinity;
    ch.pass = finite && ch.spread <= opt.max_spread;
  }
  return checks;
}

/// Log-spaced scales covering the given number of decades.
inline std::vector<double> scale_sweep(double smallest, double decades, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(smallest * std::pow(10.0, decades * i / (count - 1)));
  }
  return out;
}

}  // namespace nls
