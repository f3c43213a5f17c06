#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nls/flows.hpp"
#include "nls/integrators.hpp"
#include "nls/norms.hpp"

namespace nls {

// ---------------------------------------------------------------------------
// Admissible pairs

/// Exponent pair (q, r) for d dimensions; either exponent may be infinity.
struct AdmissiblePair {
  double q;
  double r;
  int dim;
};

namespace detail {
inline double reciprocal(double x) { return std::isinf(x) ? 0.0 : 1.0 / x; }
inline constexpr double pair_tolerance = 1e-12;
}  // namespace detail

/// 2/q + d/r = d/2, 2 <= q, r <= inf, (q, r, d) != (2, inf, 2).
inline bool admissible_check(double q, double r, int d) {
  if (d < 1) return false;
  if (!(q >= 2.0) || !(r >= 2.0)) return false;
  if (d == 2 && q == 2.0 && std::isinf(r)) return false;
  const double lhs = 2.0 * detail::reciprocal(q) + d * detail::reciprocal(r);
  return std::abs(lhs - 0.5 * d) <= detail::pair_tolerance * std::max(1.0, 0.5 * d);
}

inline bool admissible_check(const AdmissiblePair& pr) { return admissible_check(pr.q, pr.r, pr.dim); }

/// Extended range for radial data (d >= 2):
/// 2/q + (2d-1)/r <= (2d-1)/2, q >= 2, (q, r) != (2, (4d-2)/(2d-3)).
inline bool radial_range_check(double q, double r, int d) {
  if (d < 2) return false;
  if (!(q >= 2.0) || !(r >= 1.0)) return false;
  const double k = 2.0 * d - 1.0;
  const double lhs = 2.0 * detail::reciprocal(q) + k * detail::reciprocal(r);
  if (lhs > 0.5 * k + detail::pair_tolerance * k) return false;
  const double r_end = (4.0 * d - 2.0) / (2.0 * d - 3.0);
  if (q == 2.0 && std::abs(r - r_end) <= detail::pair_tolerance * r_end) return false;
  return true;
}

namespace detail {
inline void check_subcritical(int d, double p) {
  if (d < 1 || d > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
  if (!(p > 0.0 && p < 4.0 / d)) throw std::invalid_argument("need 0 < p < 4/d");
}
}  // namespace detail

/// 1/r0 = 1/(p+2), 1/q0 = dp / (4(p+2)).
inline AdmissiblePair q0r0(int d, double p) {
  detail::check_subcritical(d, p);
  return {4.0 * (p + 2.0) / (d * p), p + 2.0, d};
}

/// 1/r1 = (p+1) / (2(2p+1)), 1/q1 = dp / (4(2p+1)).
inline AdmissiblePair q1r1(int d, double p) {
  detail::check_subcritical(d, p);
  return {4.0 * (2.0 * p + 1.0) / (d * p), 2.0 * (2.0 * p + 1.0) / (p + 1.0), d};
}

// ---------------------------------------------------------------------------
// Discrete space-time norms

/// Half-open time window [begin, end).
struct TimeInterval {
  double begin;
  double end;
};

/// (tau sum_{n tau in I} ||f(n tau)||_{L^r}^q)^{1/q}, or the max for
/// q = inf. Every step inside I must have a snapshot.
inline double discrete_strichartz_norm(const Trajectory& traj, double q, double r,
                                       TimeInterval interval) {
  if (!(q >= 1.0)) throw std::invalid_argument("time exponent q must be >= 1");
  const double tau = std::abs(traj.config.tau);
  const double eps = 1e-9;
  const auto first = static_cast<long>(std::ceil(interval.begin / tau - eps));
  const auto last = static_cast<long>(std::ceil(interval.end / tau - eps)) - 1;
  if (last < first) return 0.0;

  std::vector<double> values;
  long expected = std::max(first, 0L);
  for (const auto& s : traj.snapshots) {
    const auto k = static_cast<long>(s.step);
    if (k < expected) continue;
    if (k > last) break;
    if (k != expected) break;
    values.push_back(norm(s.field, Lr{r}));
    ++expected;
  }
  if (expected <= last || first < 0) {
    throw std::invalid_argument("trajectory is missing snapshots inside the interval");
  }
  if (std::isinf(q)) return *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::pow(v, q);
  return std::pow(tau * sum, 1.0 / q);
}

// ---------------------------------------------------------------------------
// Errors and order fits

/// max over shared snapshot times of the L2 gap.
inline double measure_error(const Trajectory& scheme, const Trajectory& reference) {
  if (!(scheme.grid == reference.grid)) throw std::invalid_argument("trajectories on different grids");
  return max_snapshot_gap(scheme, reference);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Root-mean-square of the residuals.
  double residual = 0.0;
};

/// Ordinary least squares y = slope x + intercept.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit needs >= 2 matched points");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit needs distinct abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.slope * x[i] + fit.intercept);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

struct ConvergenceReport {
  std::string scheme;
  std::string data_spec;
  std::vector<double> taus;  // strictly decreasing
  std::vector<double> errors;
  std::vector<double> oracle_gaps;
  std::vector<double> mass_drifts;
  std::vector<bool> oracle_flagged;
  double fitted_order = 0.0;
  double fit_residual = 0.0;
  bool excluded_coarsest = false;
};

struct OrderFit {
  double order = 0.0;
  double residual = 0.0;
  bool excluded_coarsest = false;
};

inline constexpr double pre_asymptotic_residual = 0.1;

/// Slope of ln(error) against ln(tau). When the residual exceeds 0.1 and
/// at least three points remain, the coarsest tau is dropped once.
inline OrderFit fit_order(const ConvergenceReport& report) {
  const auto& taus = report.taus;
  const auto& errs = report.errors;
  if (taus.size() != errs.size() || taus.size() < 2) throw std::invalid_argument("report needs >= 2 points");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(errs[i] > 0.0)) throw std::invalid_argument("errors must be positive to fit an order");
    if (i > 0 && !(taus[i] < taus[i - 1])) throw std::invalid_argument("taus must be strictly decreasing");
  }
  auto fit_from = [&](std::size_t start) {
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = start; i < taus.size(); ++i) {
      x.push_back(std::log(taus[i]));
      y.push_back(std::log(errs[i]));
    }
    return fit_line(x, y);
  };
  LineFit f = fit_from(0);
  OrderFit out{f.slope, f.residual, false};
  if (f.residual > pre_asymptotic_residual && taus.size() >= 4) {
    const LineFit g = fit_from(1);
    out = {g.slope, g.residual, true};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mass

inline double mass(const ComplexField& f) {
  const double n = l2_norm(f);
  return n * n;
}

/// Max relative deviation of the L2 mass from t = 0. For filtered runs only
/// increases above the running minimum count.
inline double mass_drift(const Trajectory& traj) {
  if (traj.snapshots.empty()) throw std::invalid_argument("trajectory has no snapshots");
  const double m0 = mass(traj.snapshots.front().field);
  if (m0 == 0.0) return 0.0;
  double drift = 0.0;
  if (traj.config.scheme == Scheme::filtered_lie) {
    double envelope = m0;
    for (const auto& s : traj.snapshots) {
      const double m = mass(s.field);
      drift = std::max(drift, (m - envelope) / m0);
      envelope = std::min(envelope, m);
    }
  } else {
    for (const auto& s : traj.snapshots) drift = std::max(drift, std::abs(mass(s.field) - m0) / m0);
  }
  return drift;
}

// ---------------------------------------------------------------------------
// Radial-data error bound

/// User-supplied stand-ins for the non-explicit constants C_{d,p}.
struct BoundConstants {
  double c = 1.0;
  double exponent = 1.0;  // power of ||phi|| in the middle term
};

/// Inputs of the bound that depend on phi, precomputed.
struct BoundInputs {
  double tau;
  double tilde_tau;
  double horizon;
  int dim;
  double p;
  double phi_norm;       // ||phi||_{L2}
  double filter_tail;    // ||phi - P(tilde_tau) phi||_{L2}
};

/// C exp(C T ||phi||^{4p/(4-dp)}) * ( ||phi - P(tt) phi|| + tt^{(4-dp)/8} T ||phi||^{E}
///   + (tau/tt)^{1/2} (||phi|| + ||phi||^{p+1}) ).
inline double theorem2_bound(const BoundInputs& in, const BoundConstants& k) {
  if (!(in.tau > 0.0 && in.tau <= in.tilde_tau && in.tilde_tau < 1.0)) {
    throw std::invalid_argument("bound needs 0 < tau <= tilde_tau < 1");
  }
  detail::check_subcritical(in.dim, in.p);
  if (!(in.horizon >= 0.0)) throw std::invalid_argument("bound needs T >= 0");
  const double dp = in.dim * in.p;
  const double growth = k.c * std::exp(k.c * in.horizon * std::pow(in.phi_norm, 4.0 * in.p / (4.0 - dp)));
  const double middle = std::pow(in.tilde_tau, (4.0 - dp) / 8.0) * in.horizon * std::pow(in.phi_norm, k.exponent);
  const double last = std::sqrt(in.tau / in.tilde_tau) * (in.phi_norm + std::pow(in.phi_norm, in.p + 1.0));
  return growth * (in.filter_tail + middle + last);
}

inline double theorem2_bound(const ComplexField& phi, double tau, double tilde_tau, double horizon,
                             double p, const BoundConstants& k) {
  if (!(tilde_tau > 0.0)) throw std::invalid_argument("bound needs tilde_tau > 0");
  const FilterKernel kernel(phi.grid(), tilde_tau);
  const double tail = l2_distance(phi, apply_filter(phi, kernel));
  return theorem2_bound(BoundInputs{tau, tilde_tau, horizon, phi.grid().dim(), p, l2_norm(phi), tail}, k);
}

// ---------------------------------------------------------------------------
// Pointwise mean-value inequalities

struct MvtSample {
  double tau;
  Complex v;
  Complex w;
};

namespace detail {

inline double radical_inverse(std::size_t i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

/// e^{-i theta} - 1 without cancellation.
inline Complex expm1_neg_i(double theta) {
  const double s = std::sin(0.5 * theta);
  return {-2.0 * s * s, -std::sin(theta)};
}

/// theta - sin(theta), series for small arguments.
inline double theta_minus_sin(double theta) {
  if (std::abs(theta) < 1e-2) {
    const double t2 = theta * theta;
    return theta * t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0));
  }
  return theta - std::sin(theta);
}

/// (N(tau) - I)/tau applied to v.
inline Complex mvt_rate(double tau, Complex v, double lambda, double p) {
  return expm1_neg_i(tau * lambda * modulus_power(v, p)) / tau * v;
}

}  // namespace detail

/// Deterministic Halton cloud with 0 < tau < 1 (log-uniform down to 1e-4)
/// and |v|, |w| <= 10. Half of the pairs put w in a shrinking neighbourhood
/// of v. The first n points of a larger cloud equal the n-point cloud.
inline std::vector<MvtSample> make_mvt_cloud(std::size_t n) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<MvtSample> out;
  out.reserve(n);
  for (std::size_t i = 1; out.size() < n; ++i) {
    const double u0 = detail::radical_inverse(i, 2);
    const double u1 = detail::radical_inverse(i, 3);
    const double u2 = detail::radical_inverse(i, 5);
    const double u3 = detail::radical_inverse(i, 7);
    const double u4 = detail::radical_inverse(i, 11);
    const double u5 = detail::radical_inverse(i, 13);
    const double tau = std::pow(10.0, -4.0 * u0);
    if (!(tau < 1.0)) {
      out.push_back({0.5, {1.0, 0.0}, {0.0, 0.0}});
      continue;
    }
    const Complex v = std::polar(10.0 * std::max(u1, 1e-3), two_pi * u2);
    Complex w;
    if (u3 < 0.5) {
      w = v + std::abs(v) * std::pow(10.0, -4.0 * u4) * std::polar(1.0, two_pi * u5);
      if (std::abs(w) > 10.0) w *= 10.0 / std::abs(w);
    } else {
      w = std::polar(10.0 * u4, two_pi * u5);
    }
    out.push_back({tau, v, w});
  }
  return out;
}

struct MvtConstants {
  double lipschitz = 0.0;  // smallest c for the difference inequality
  double taylor = 0.0;     // smallest c for the first-order remainder
};

/// Smallest constants valid over the cloud for both signs of lambda:
///   |R v - R w| <= c |v - w| (|v|^p + |w|^p),
///   |R v + i lambda |v|^p v| <= c tau |v|^{2p+1},
/// with R = (N(tau) - I)/tau.
inline MvtConstants fit_mvt_constants(double p, const std::vector<MvtSample>& cloud) {
  if (!(p > 0.0)) throw std::invalid_argument("mvt needs p > 0");
  MvtConstants c;
  for (const auto& smp : cloud) {
    if (!(smp.tau > 0.0 && smp.tau < 1.0)) throw std::invalid_argument("mvt samples need 0 < tau < 1");
    for (double lambda : {1.0, -1.0}) {
      const double av = std::abs(smp.v);
      const double dvw = std::abs(smp.v - smp.w);
      const double den1 = dvw * (detail::modulus_power(smp.v, p) + detail::modulus_power(smp.w, p));
      if (den1 > 0.0) {
        const Complex lhs = detail::mvt_rate(smp.tau, smp.v, lambda, p) -
                            detail::mvt_rate(smp.tau, smp.w, lambda, p);
        c.lipschitz = std::max(c.lipschitz, std::abs(lhs) / den1);
      }
      if (av > 0.0) {
        // R v + i lambda |v|^p v = v/tau (e^{-i theta} - 1 + i theta).
        const double theta = smp.tau * lambda * detail::modulus_power(smp.v, p);
        const double s = std::sin(0.5 * theta);
        const Complex rem(-2.0 * s * s, detail::theta_minus_sin(theta));
        const double lhs = std::abs(rem) * av / smp.tau;
        const double den2 = smp.tau * std::pow(av, 2.0 * p + 1.0);
        c.taylor = std::max(c.taylor, lhs / den2);
      }
    }
  }
  return c;
}

struct MvtResult {
  double p;
  MvtConstants base;
  MvtConstants doubled;
  bool pass;
};

inline constexpr double mvt_stability = 0.10;

/// Fits both constants on an n-point and a 2n-point cloud; passes when
/// both are finite, positive, and agree within 10%.
inline MvtResult verify_mvt(double p, std::size_t cloud_size = 20000) {
  const auto small = make_mvt_cloud(cloud_size);
  const auto large = make_mvt_cloud(2 * cloud_size);
  MvtResult r{p, fit_mvt_constants(p, small), fit_mvt_constants(p, large), false};
  auto stable = [](double a, double b) {
    return std::isfinite(a) && std::isfinite(b) && a > 0.0 && std::abs(b - a) <= mvt_stability * a;
  };
  r.pass = stable(r.base.lipschitz, r.doubled.lipschitz) && stable(r.base.taylor, r.doubled.taylor);
  return r;
}

}  // namespace nls
