#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nls/analysis.hpp"
#include "nls/bernstein.hpp"
#include "nls/initial_data.hpp"
#include "nls/integrators.hpp"

namespace nls {

/// One measured check: pass iff value <= threshold (or the predicate held).
struct CheckRecord {
  std::string suite;
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline nlohmann::ordered_json to_json(const CheckRecord& c) {
  return {{"suite", c.suite}, {"check", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}};
}

inline const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names = {"mass", "duhamel", "bernstein", "mvt", "plane_wave", "pairs"};
  return names;
}

namespace detail {

inline std::string short_real(double x) {
  if (std::isinf(x)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

inline CheckRecord at_most(std::string suite, std::string name, double value, double threshold) {
  return {std::move(suite), std::move(name), value, threshold, std::isfinite(value) && value <= threshold};
}

}  // namespace detail

/// Relative L2 mass drift of Lie and Strang over 10^4 unfiltered steps.
inline std::vector<CheckRecord> verify_mass(std::size_t steps = 10000) {
  const SpectralGrid grid(1, 256, 16.0);
  const ComplexField phi = gaussian(grid, 1.0, 1.0);
  std::vector<CheckRecord> out;
  for (Scheme s : {Scheme::lie, Scheme::strang}) {
    for (double lambda : {1.0, -1.0}) {
      SplitConfig cfg;
      cfg.scheme = s;
      cfg.lambda = lambda;
      cfg.tau = 1e-3;
      cfg.horizon = cfg.tau * static_cast<double>(steps);
      for (std::size_t k = 0; k <= steps; k += 100) cfg.snapshot_times.push_back(cfg.tau * static_cast<double>(k));
      const Trajectory traj = evolve(phi, cfg);
      out.push_back(detail::at_most("mass", to_string(s) + (lambda > 0 ? "/defocusing" : "/focusing"),
                                    mass_drift(traj), 1e-12));
    }
  }
  return out;
}

/// Duhamel residual of a 64-step filtered Lie run.
inline std::vector<CheckRecord> verify_duhamel() {
  const SpectralGrid grid(1, 256, 16.0);
  std::vector<CheckRecord> out;
  for (double p : {2.0, 1.0}) {
    SplitConfig cfg;
    cfg.scheme = Scheme::filtered_lie;
    cfg.p = p;
    cfg.tau = 1.0 / 64.0;
    cfg.horizon = 1.0;
    cfg = with_every_step(cfg);
    const Trajectory traj = evolve(gaussian(grid, 1.0, 1.0), cfg);
    out.push_back(detail::at_most("duhamel", "filtered_lie/64 steps/p=" + detail::short_real(p),
                                  duhamel_residual(traj), 1e-10));
  }
  return out;
}

/// Final-time error against the exact plane wave e^{i(2x - 5t)}, L = pi.
inline std::vector<CheckRecord> verify_plane_wave() {
  const SpectralGrid grid(1, 64, std::numbers::pi);
  const std::vector<long> mode = {2};
  const ComplexField phi = plane_wave(grid, mode, 1.0);
  const ComplexField exact = exact_plane_wave(grid, mode, 1.0, 1.0, 2.0, 1.0);
  std::vector<CheckRecord> out;
  for (Scheme s : {Scheme::lie, Scheme::strang, Scheme::filtered_lie}) {
    SplitConfig cfg;
    cfg.scheme = s;
    cfg.tau = 1.0 / 64.0;
    cfg.horizon = 1.0;
    const Trajectory traj = evolve(phi, cfg);
    out.push_back(detail::at_most("plane_wave", to_string(s), l2_distance(traj.snapshots.back().field, exact), 1e-10));
  }
  return out;
}

/// Multiplier inequalities on random band-limited fields, s over two decades.
inline std::vector<CheckRecord> verify_bernstein(std::uint64_t seed = 1, int fields = 200) {
  const SpectralGrid grid(1, 1024, 16.0);
  BernsteinOptions opt;
  opt.scales = scale_sweep(1e-2, 2.0, 5);
  opt.fields_per_scale = fields;
  opt.seed = seed;
  std::vector<CheckRecord> out;
  for (const auto& ch : bernstein_suite(grid, opt)) {
    std::string name = ch.inequality + "/r=" + detail::short_real(ch.r);
    if (ch.inequality == "lq_to_lr") name += "/q=" + detail::short_real(ch.q);
    if (ch.sigma > 0.0) name += "/sigma=" + detail::short_real(ch.sigma);
    out.push_back({"bernstein", name, ch.spread, opt.max_spread, ch.pass});
  }
  return out;
}

/// Mean-value constants for p in {0.5, 1, 2, 3}; value is the relative
/// change of the worse constant under cloud doubling.
inline std::vector<CheckRecord> verify_mvt_suite(std::size_t cloud_size = 20000) {
  std::vector<CheckRecord> out;
  for (double p : {0.5, 1.0, 2.0, 3.0}) {
    const MvtResult r = verify_mvt(p, cloud_size);
    const double d1 = std::abs(r.doubled.lipschitz - r.base.lipschitz) / r.base.lipschitz;
    const double d2 = std::abs(r.doubled.taylor - r.base.taylor) / r.base.taylor;
    out.push_back({"mvt", "p=" + detail::short_real(p), std::max(d1, d2), mvt_stability, r.pass});
  }
  return out;
}

/// q0r0 / q1r1 admissibility over 100 sampled (d, p), plus radial-range
/// acceptance inside the strict region and rejection of its endpoint.
inline std::vector<CheckRecord> verify_pairs(std::size_t samples = 100) {
  std::vector<CheckRecord> out;
  std::size_t failures = 0;
  for (std::size_t i = 1; i <= samples; ++i) {
    const int d = 1 + static_cast<int>((i - 1) % 3);
    const double p = (4.0 / d) * (0.01 + 0.98 * detail::radical_inverse(i, 2));
    if (!admissible_check(q0r0(d, p))) ++failures;
    if (!admissible_check(q1r1(d, p))) ++failures;
  }
  out.push_back({"pairs", "q0r0,q1r1 admissible", static_cast<double>(failures), 0.0, failures == 0});

  std::size_t wrong = 0;
  for (int d = 2; d <= 3; ++d) {
    const double k = 2.0 * d - 1.0;
    for (std::size_t i = 1; i <= samples; ++i) {
      // Strictly inside: 2/q + k/r = theta k/2 with theta in (0, 1).
      const double theta = 0.02 + 0.96 * detail::radical_inverse(i, 3);
      const double share = 0.02 + 0.96 * detail::radical_inverse(i, 5);
      const double budget = 0.5 * k * theta;
      const double inv_q = std::min(0.5, share * budget / 2.0);
      const double inv_r = (budget - 2.0 * inv_q) / k;
      const double q = 1.0 / inv_q;
      const double r = inv_r > 0.0 ? 1.0 / inv_r : infinity;
      if (!radial_range_check(q, r, d)) ++wrong;
    }
    if (radial_range_check(2.0, (4.0 * d - 2.0) / (2.0 * d - 3.0), d)) ++wrong;
  }
  out.push_back({"pairs", "radial range", static_cast<double>(wrong), 0.0, wrong == 0});
  return out;
}

/// Runs the named suites in the given order.
inline std::vector<CheckRecord> run_verify(const std::vector<std::string>& suites, std::uint64_t seed = 1) {
  const auto& known = verify_suite_names();
  for (const auto& s : suites) {
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      throw std::invalid_argument("unknown verify suite '" + s + "'");
    }
  }
  std::vector<CheckRecord> out;
  auto append = [&out](std::vector<CheckRecord> v) { out.insert(out.end(), v.begin(), v.end()); };
  for (const auto& s : suites) {
    if (s == "mass") append(verify_mass());
    else if (s == "duhamel") append(verify_duhamel());
    else if (s == "bernstein") append(verify_bernstein(seed));
    else if (s == "mvt") append(verify_mvt_suite());
    else if (s == "plane_wave") append(verify_plane_wave());
    else append(verify_pairs());
  }
  return out;
}

}  // namespace nls
