#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "nls/complex_field.hpp"
#include "nls/fft.hpp"
#include "nls/flows.hpp"
#include "nls/norms.hpp"

namespace nls {

enum class Scheme { lie, strang, filtered_lie };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::lie: return "lie";
    case Scheme::strang: return "strang";
    case Scheme::filtered_lie: return "filtered_lie";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& name) {
  if (name == "lie") return Scheme::lie;
  if (name == "strang") return Scheme::strang;
  if (name == "filtered_lie" || name == "flt") return Scheme::filtered_lie;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

/// Filter scale s equal to the step size.
struct StepScale {};
/// Filter scale fixed independently of the step size.
struct FixedScale {
  double s;
};
/// s = tau^{1 - eps}.
struct PowerScale {
  double eps;
};
/// s = tau (-ln tau)^alpha.
struct LogScale {
  double alpha;
};

using FilterRule = std::variant<StepScale, FixedScale, PowerScale, LogScale>;

inline double resolve_filter_scale(const FilterRule& rule, double tau) {
  const double s = std::visit(
      [tau](const auto& r) -> double {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, StepScale>) {
          return tau;
        } else if constexpr (std::is_same_v<R, FixedScale>) {
          return r.s;
        } else if constexpr (std::is_same_v<R, PowerScale>) {
          return std::pow(tau, 1.0 - r.eps);
        } else {
          if (!(tau < 1.0)) throw std::invalid_argument("log filter rule needs tau < 1");
          return tau * std::pow(-std::log(tau), r.alpha);
        }
      },
      rule);
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("filter rule does not resolve to a positive scale");
  }
  return s;
}

inline std::string describe(const FilterRule& rule) {
  return std::visit(
      [](const auto& r) -> std::string {
        using R = std::decay_t<decltype(r)>;
        std::ostringstream os;
        os.precision(17);
        if constexpr (std::is_same_v<R, StepScale>) {
          os << "tau";
        } else if constexpr (std::is_same_v<R, FixedScale>) {
          os << "fixed(" << r.s << ")";
        } else if constexpr (std::is_same_v<R, PowerScale>) {
          os << "power(" << r.eps << ")";
        } else {
          os << "log(" << r.alpha << ")";
        }
        return os.str();
      },
      rule);
}

/// Raised when a run produces non-finite values.
class NumericGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SplitConfig {
  Scheme scheme = Scheme::lie;
  double lambda = 1.0;
  double p = 2.0;
  double tau = 1e-2;
  FilterRule filter_rule = StepScale{};
  double horizon = 1.0;
  /// Multiples of tau in [0, horizon]. Empty means {0, horizon}.
  std::vector<double> snapshot_times;
  /// Analysis parameter for bound evaluation; never used by the stepper.
  std::optional<double> tilde_tau;
  /// Skip the nonlinear flow entirely (linear probes). Negative tau is
  /// accepted only in this mode.
  bool linear_only = false;

  /// Number of steps: horizon / |tau| rounded down.
  std::size_t steps() const {
    const double ratio = horizon / std::abs(tau);
    return static_cast<std::size_t>(std::floor(ratio + 1e-9));
  }
  double effective_horizon() const { return static_cast<double>(steps()) * std::abs(tau); }
  bool horizon_rounded() const {
    return std::abs(effective_horizon() - horizon) > 1e-12 * std::max(1.0, horizon);
  }

  void validate() const {
    if (lambda != 1.0 && lambda != -1.0) throw std::invalid_argument("lambda must be +1 or -1");
    if (!(p > 0.0)) throw std::invalid_argument("nonlinearity exponent p must be positive");
    if (!(tau != 0.0) || !std::isfinite(tau)) throw std::invalid_argument("step tau must be nonzero");
    if (tau < 0.0 && !linear_only) {
      throw std::invalid_argument("negative tau is only allowed for linear-only runs");
    }
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
      throw std::invalid_argument("horizon must be non-negative");
    }
    if (tilde_tau) {
      if (!(std::abs(tau) <= *tilde_tau && *tilde_tau < 1.0)) {
        throw std::invalid_argument("tilde_tau must satisfy tau <= tilde_tau < 1");
      }
    }
    if (scheme == Scheme::filtered_lie) (void)filter_scale();
    (void)snapshot_steps();
  }

  double filter_scale() const { return resolve_filter_scale(filter_rule, std::abs(tau)); }

  /// Step indices of the requested snapshots, strictly increasing, always
  /// starting at 0.
  std::vector<std::size_t> snapshot_steps() const {
    const std::size_t n = steps();
    std::vector<std::size_t> out;
    if (snapshot_times.empty()) {
      out.push_back(0);
      if (n > 0) out.push_back(n);
      return out;
    }
    const double step = std::abs(tau);
    for (double t : snapshot_times) {
      const double k = std::round(t / step);
      if (k < 0.0 || std::abs(k * step - t) > 1e-9 * std::max(1.0, std::abs(t))) {
        std::ostringstream os;
        os << "snapshot time " << t << " is not a non-negative multiple of tau = " << step;
        throw std::invalid_argument(os.str());
      }
      const auto ki = static_cast<std::size_t>(k);
      if (ki > n) throw std::invalid_argument("snapshot time beyond the horizon");
      if (!out.empty() && ki <= out.back()) {
        throw std::invalid_argument("snapshot times must be strictly increasing");
      }
      out.push_back(ki);
    }
    if (out.front() != 0) out.insert(out.begin(), 0);
    return out;
  }

  /// Non-fatal hypothesis checks, one message each.
  std::vector<std::string> warnings(int dim) const {
    std::vector<std::string> w;
    if (!linear_only && !(p < 4.0 / dim)) {
      std::ostringstream os;
      os << "p = " << p << " is not mass-subcritical for d = " << dim << " (needs p < 4/d)";
      w.push_back(os.str());
    }
    if (horizon_rounded()) {
      std::ostringstream os;
      os.precision(17);
      os << "horizon rounded down from " << horizon << " to " << effective_horizon();
      w.push_back(os.str());
    }
    return w;
  }
};

/// Snapshot at every step from 0 to the horizon.
inline SplitConfig with_every_step(SplitConfig cfg) {
  cfg.snapshot_times.clear();
  const std::size_t n = cfg.steps();
  for (std::size_t k = 0; k <= n; ++k) cfg.snapshot_times.push_back(static_cast<double>(k) * std::abs(cfg.tau));
  return cfg;
}

struct Snapshot {
  double time;
  std::size_t step;
  ComplexField field;  // physical space
};

struct Trajectory {
  SplitConfig config;
  SpectralGrid grid;
  std::vector<Snapshot> snapshots;
  /// Resolved filter scale for filtered runs.
  std::optional<double> filter_scale;
  /// Two-finest-levels gap, set by reference_solution.
  std::optional<double> oracle_self_gap;
  bool oracle_flagged = false;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Single steps (value semantics; output in physical space).

inline ComplexField step_lie(ComplexField f, double tau, double lambda, double p) {
  detail::to_physical(f);
  detail::nonlinear_phase_inplace(f.values(), tau, lambda, p);
  detail::to_frequency(f);
  detail::linear_phase_inplace(f.grid(), f.values(), tau);
  detail::to_physical(f);
  return f;
}

inline ComplexField step_strang(ComplexField f, double tau, double lambda, double p) {
  detail::to_physical(f);
  detail::nonlinear_phase_inplace(f.values(), 0.5 * tau, lambda, p);
  detail::to_frequency(f);
  detail::linear_phase_inplace(f.grid(), f.values(), tau);
  detail::to_physical(f);
  detail::nonlinear_phase_inplace(f.values(), 0.5 * tau, lambda, p);
  return f;
}

inline ComplexField step_filtered_lie(ComplexField f, double tau, double lambda, double p,
                                      const FilterKernel& kernel) {
  detail::check_same_grid(f.grid(), kernel.grid());
  detail::to_physical(f);
  detail::nonlinear_phase_inplace(f.values(), tau, lambda, p);
  detail::to_frequency(f);
  detail::linear_phase_inplace(f.grid(), f.values(), tau);
  const auto& w = kernel.weights();
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= w[i];
  detail::to_physical(f);
  return f;
}

namespace detail {

inline bool all_finite(const ComplexBuffer& v) {
  for (const auto& z : v) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

/// Fraction of L2 mass in the outer 1/16 of the box along any axis.
inline double boundary_shell_fraction(const ComplexField& f) {
  const auto& g = f.grid();
  const double inner = g.half_width() * (1.0 - 1.0 / 16.0);
  double shell = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double m = std::norm(f[i]);
    total += m;
    const auto idx = g.unflatten(i);
    bool outer = false;
    for (int a = 0; a < g.dim(); ++a) outer = outer || std::abs(g.coordinate(idx[a])) >= inner;
    if (outer) shell += m;
  }
  return total > 0.0 ? shell / total : 0.0;
}

inline constexpr double boundary_shell_tolerance = 1e-8;

inline void check_boundary(const ComplexField& f, double t, std::vector<std::string>& warnings) {
  const double frac = boundary_shell_fraction(f);
  if (frac > boundary_shell_tolerance) {
    std::ostringstream os;
    os << "boundary-shell mass fraction " << frac << " at t = " << t << " exceeds "
       << boundary_shell_tolerance;
    warnings.push_back(os.str());
  }
}

}  // namespace detail

/// Runs the configured splitting scheme from phi and records the requested
/// snapshots. For filtered_lie the initial state is P(s) phi.
inline Trajectory evolve(const ComplexField& phi, const SplitConfig& cfg) {
  cfg.validate();
  const SpectralGrid& grid = phi.grid();
  Trajectory traj{cfg, grid, {}, std::nullopt, std::nullopt, false, cfg.warnings(grid.dim())};

  const std::size_t n = cfg.steps();
  const auto wanted = cfg.snapshot_steps();
  const double tau = cfg.tau;
  const double lambda = cfg.linear_only ? 0.0 : cfg.lambda;
  const double p = cfg.p;

  // Frequency-side multiplier for one step: e^{-i tau |xi|^2}, times the
  // filter weights for the filtered scheme.
  ComplexBuffer multiplier(grid.total_points());
  const auto& k2 = grid.wavenumber_norm2_table();
  for (std::size_t i = 0; i < multiplier.size(); ++i) multiplier[i] = std::polar(1.0, -tau * k2[i]);

  ComplexField u = in_space(phi, Space::physical);
  if (cfg.scheme == Scheme::filtered_lie) {
    const FilterKernel kernel(grid, cfg.filter_scale());
    traj.filter_scale = kernel.scale();
    for (std::size_t i = 0; i < multiplier.size(); ++i) multiplier[i] *= kernel.weight(i);
    u = apply_filter(std::move(u), kernel);
  }
  const double inv_total = 1.0 / static_cast<double>(grid.total_points());
  for (auto& m : multiplier) m *= inv_total;

  auto record = [&](std::size_t step) {
    if (!detail::all_finite(u.values())) {
      std::ostringstream os;
      os << "non-finite values at step " << step;
      throw NumericGuardError(os.str());
    }
    traj.snapshots.push_back({static_cast<double>(step) * std::abs(tau), step, u});
  };

  std::size_t next = 0;
  record(0);
  ++next;
  detail::check_boundary(u, 0.0, traj.warnings);

  // Strang half steps between consecutive steps are merged into a full
  // N(tau); a pending half step is closed before every snapshot.
  bool half_pending = false;
  for (std::size_t step = 1; step <= n; ++step) {
    auto& v = u.values();
    if (cfg.scheme == Scheme::strang) {
      detail::nonlinear_phase_inplace(v, half_pending ? tau : 0.5 * tau, lambda, p);
    } else {
      detail::nonlinear_phase_inplace(v, tau, lambda, p);
    }
    // The checkerboard signs cancel around a diagonal multiplier, and 1/M
    // is folded into it, so no per-step scale rounding accumulates.
    detail::raw_forward_inplace(grid, v);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= multiplier[i];
    detail::raw_inverse_inplace(grid, v);

    const bool snap = next < wanted.size() && wanted[next] == step;
    if (cfg.scheme == Scheme::strang) {
      if (snap || step == n) {
        detail::nonlinear_phase_inplace(v, 0.5 * tau, lambda, p);
        half_pending = false;
      } else {
        half_pending = true;
      }
    }
    if (snap) {
      record(step);
      ++next;
    }
  }
  if (traj.snapshots.size() > 1) {
    detail::check_boundary(traj.snapshots.back().field, traj.snapshots.back().time, traj.warnings);
  }
  return traj;
}

/// Largest L2 gap between two trajectories over their shared snapshot
/// times.
inline double max_snapshot_gap(const Trajectory& a, const Trajectory& b) {
  double gap = 0.0;
  std::size_t j = 0;
  std::size_t shared = 0;
  for (const auto& sa : a.snapshots) {
    while (j < b.snapshots.size() &&
           b.snapshots[j].time < sa.time - 1e-9 * std::max(1.0, sa.time)) {
      ++j;
    }
    if (j < b.snapshots.size() &&
        std::abs(b.snapshots[j].time - sa.time) <= 1e-9 * std::max(1.0, sa.time)) {
      gap = std::max(gap, l2_distance(sa.field, b.snapshots[j].field));
      ++shared;
    }
  }
  if (shared == 0) throw std::invalid_argument("trajectories share no snapshot times");
  return gap;
}

inline constexpr double smooth_oracle_ceiling = 1e-8;
inline constexpr double rough_oracle_ceiling = 1e-4;

/// Fine-step unfiltered Strang run standing in for the exact flow.
///
/// Steps with tau / 2^levels, snapshots at cfg_base's snapshot times, and
/// certifies itself by the max L2 gap to the run with twice that step.
inline Trajectory reference_solution(const ComplexField& phi, const SplitConfig& cfg_base,
                                     int refinement_levels,
                                     double ceiling = smooth_oracle_ceiling) {
  if (refinement_levels < 2) throw std::invalid_argument("reference needs >= 2 refinement levels");
  cfg_base.validate();

  std::vector<double> times;
  for (std::size_t k : cfg_base.snapshot_steps()) {
    times.push_back(static_cast<double>(k) * std::abs(cfg_base.tau));
  }

  SplitConfig fine = cfg_base;
  fine.scheme = Scheme::strang;
  fine.filter_rule = StepScale{};
  fine.horizon = cfg_base.effective_horizon();
  fine.snapshot_times = times;
  fine.tau = cfg_base.tau / std::ldexp(1.0, refinement_levels);
  fine.tilde_tau.reset();

  SplitConfig coarse = fine;
  coarse.tau = 2.0 * fine.tau;

  Trajectory ref = evolve(phi, fine);
  const Trajectory check = evolve(phi, coarse);
  ref.oracle_self_gap = max_snapshot_gap(ref, check);
  ref.oracle_flagged = *ref.oracle_self_gap > ceiling;
  if (ref.oracle_flagged) {
    std::ostringstream os;
    os << "oracle self-gap " << *ref.oracle_self_gap << " exceeds ceiling " << ceiling;
    ref.warnings.push_back(os.str());
  }
  return ref;
}

enum class DuhamelForm {
  /// Z_n = S(n tau) P^{n+1} phi + tau sum_k S((n-k) tau) P^{n-k} G_k; exact
  /// for any kernel.
  exact_powers,
  /// Single projection P in every term; exact only for 0/1 kernels.
  single_projection,
};

/// Max over n of the relative L2 gap between the stored Z(n tau) and the
/// discrete Duhamel sum rebuilt from the earlier snapshots, where
/// G_k = tau * ((exp(-i tau lambda |Z_k|^p) - 1) / tau) Z_k.
inline double duhamel_residual(const Trajectory& traj,
                               DuhamelForm form = DuhamelForm::exact_powers) {
  const auto& cfg = traj.config;
  if (cfg.scheme != Scheme::filtered_lie || !traj.filter_scale) {
    throw std::invalid_argument("duhamel_residual needs a filtered_lie trajectory");
  }
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    if (traj.snapshots[i].step != i) {
      throw std::invalid_argument("duhamel_residual needs a snapshot at every step");
    }
  }
  const std::size_t count = traj.snapshots.size();
  if (count < 2) return 0.0;

  const SpectralGrid& grid = traj.grid;
  const FilterKernel kernel(grid, *traj.filter_scale);
  const auto& w = kernel.weights();
  const auto& k2 = grid.wavenumber_norm2_table();
  const double tau = cfg.tau;
  const double lambda = cfg.linear_only ? 0.0 : cfg.lambda;
  const std::size_t m = grid.total_points();

  // Frequency coefficients of Z_0 and of the nonlinear increments G_k.
  const ComplexField z0 = in_space(traj.snapshots[0].field, Space::frequency);
  std::vector<ComplexBuffer> increments;
  increments.reserve(count - 1);
  for (std::size_t k = 0; k + 1 < count; ++k) {
    ComplexField g = traj.snapshots[k].field;
    for (auto& z : g.values()) {
      const Complex rate = (std::polar(1.0, -tau * lambda * detail::modulus_power(z, cfg.p)) - 1.0) / tau;
      z = tau * rate * z;
    }
    detail::to_frequency(g);
    increments.push_back(std::move(g.values()));
  }

  auto filter_power = [&](std::size_t i, std::size_t j) {
    return form == DuhamelForm::exact_powers ? std::pow(w[i], static_cast<double>(j)) : w[i];
  };

  double worst = 0.0;
  for (std::size_t n = 1; n < count; ++n) {
    const ComplexField zn = in_space(traj.snapshots[n].field, Space::frequency);
    double gap2 = 0.0;
    double ref2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      // exact: S(n tau) P^n Z_0 (= S P^{n+1} phi); single: S(n tau) Z_0.
      const double first_filter = form == DuhamelForm::exact_powers
                                      ? std::pow(w[i], static_cast<double>(n))
                                      : 1.0;
      Complex rhs = std::polar(1.0, -static_cast<double>(n) * tau * k2[i]) * first_filter * z0[i];
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = n - k;
        rhs += std::polar(1.0, -static_cast<double>(j) * tau * k2[i]) * filter_power(i, j) *
               increments[k][i];
      }
      gap2 += std::norm(zn[i] - rhs);
      ref2 += std::norm(zn[i]);
    }
    const double rel = ref2 > 0.0 ? std::sqrt(gap2 / ref2) : std::sqrt(gap2);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace nls
