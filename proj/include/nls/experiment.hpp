#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nls/analysis.hpp"
#include "nls/config.hpp"
#include "nls/field_io.hpp"
#include "nls/initial_data.hpp"
#include "nls/integrators.hpp"

namespace nls {

using json = nlohmann::ordered_json;

/// Runs task(i) for i in [0, count) on at most `workers` threads. The
/// first exception thrown by any task is rethrown after all threads join.
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& task) {
  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace detail {

/// Shortest text that round-trips the double exactly.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void prepare_output_dir(const std::filesystem::path& dir) {
  if (dir.empty()) throw ConfigError("no output directory given");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("output directory " + dir.string() + " cannot be created");
  }
  const auto probe = dir / ".nls_write_probe";
  {
    std::ofstream os(probe);
    if (!os || !(os << "ok")) throw ConfigError("output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

inline json grid_json(const SpectralGrid& g) {
  return {{"dim", g.dim()}, {"n_per_axis", g.n_per_axis()}, {"half_width", g.half_width()}};
}

inline json data_json(const DataSpec& spec) {
  return std::visit(
      [](const auto& d) -> json {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, GaussianSpec>) {
          return {{"kind", "gaussian"}, {"width", d.width}, {"amplitude", d.amplitude}};
        } else if constexpr (std::is_same_v<D, PlaneWaveSpec>) {
          return {{"kind", "plane_wave"}, {"mode", d.mode}, {"amplitude", d.amplitude}};
        } else if constexpr (std::is_same_v<D, HsRoughSpec>) {
          return {{"kind", "hs_rough"}, {"s", d.s}, {"seed", d.seed}, {"normalization", d.normalization}};
        } else {
          return {{"kind", "phi_alpha"}, {"alpha", d.alpha}, {"normalization", d.normalization}};
        }
      },
      spec);
}

inline json split_json(const SplitConfig& c) {
  json j{{"scheme", to_string(c.scheme)},
         {"lambda", c.lambda},
         {"p", c.p},
         {"tau", c.tau},
         {"filter_rule", describe(c.filter_rule)},
         {"horizon", c.horizon},
         {"effective_horizon", c.effective_horizon()},
         {"linear_only", c.linear_only}};
  if (c.tilde_tau) j["tilde_tau"] = *c.tilde_tau;
  return j;
}

inline std::string snapshot_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%05zu.nlsf", index);
  return buf;
}

}  // namespace detail

/// Writes one field dump per snapshot plus manifest.json into dir.
inline json write_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                             json extra = json::object()) {
  json manifest;
  manifest["format"] = "nls-trajectory v1";
  manifest["grid"] = detail::grid_json(traj.grid);
  manifest["config"] = detail::split_json(traj.config);
  if (traj.filter_scale) manifest["filter_scale"] = *traj.filter_scale;
  json snaps = json::array();
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    const auto& s = traj.snapshots[i];
    const std::string file = detail::snapshot_name(i);
    save_field(dir / file, s.field);
    snaps.push_back({{"time", s.time}, {"step", s.step}, {"mass", mass(s.field)}, {"file", file}});
  }
  manifest["snapshots"] = std::move(snaps);
  manifest["mass_drift"] = mass_drift(traj);
  if (traj.oracle_self_gap) {
    manifest["oracle_self_gap"] = *traj.oracle_self_gap;
    manifest["oracle_flagged"] = traj.oracle_flagged;
  }
  manifest["warnings"] = traj.warnings;
  for (auto& [key, value] : extra.items()) manifest[key] = value;
  std::ofstream os(dir / "manifest.json");
  os << manifest.dump(2) << "\n";
  if (!os) throw std::runtime_error("failed writing manifest");
  return manifest;
}

/// Single evolution with snapshots and manifest.
inline json run_simulate(const ExperimentConfig& cfg) {
  detail::prepare_output_dir(cfg.output);
  const SpectralGrid grid = make_grid(cfg.dim, cfg.n_per_axis, cfg.half_width);
  ComplexField phi = [&] {
    try {
      return realize(grid, cfg.data);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();

  SplitConfig split = cfg.split;
  if (cfg.snapshot_every > 0 && split.snapshot_times.empty()) {
    const std::size_t n = split.steps();
    for (std::size_t k = 0; k <= n; k += cfg.snapshot_every) {
      split.snapshot_times.push_back(static_cast<double>(k) * std::abs(split.tau));
    }
    if (n % cfg.snapshot_every != 0) split.snapshot_times.push_back(split.effective_horizon());
  }
  try {
    split.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  Trajectory traj = evolve(phi, split);
  json extra;
  extra["data"] = detail::data_json(cfg.data);
  if (const auto* pw = std::get_if<PlaneWaveSpec>(&cfg.data)) {
    const auto& last = traj.snapshots.back();
    const ComplexField exact = exact_plane_wave(grid, pw->mode, pw->amplitude,
                                                split.linear_only ? 0.0 : split.lambda, split.p, last.time);
    extra["analytic_error"] = l2_distance(last.field, exact);
  }
  if (cfg.reference_requested) {
    const Trajectory ref = reference_solution(phi, split, cfg.reference_levels, cfg.oracle_ceiling());
    extra["reference_error"] = measure_error(traj, ref);
    traj.oracle_self_gap = ref.oracle_self_gap;
    traj.oracle_flagged = ref.oracle_flagged;
  }
  return write_trajectory(cfg.output, traj, extra);
}

// ---------------------------------------------------------------------------
// Convergence sweeps

inline constexpr const char* csv_schema_line = "# nls-csv v1";

inline void write_convergence_csv(std::ostream& os, const ConvergenceReport& r) {
  os << csv_schema_line << "\n";
  os << "tau,error,oracle_gap,mass_drift,fitted_order\n";
  for (std::size_t i = 0; i < r.taus.size(); ++i) {
    os << detail::format_real(r.taus[i]) << ',' << detail::format_real(r.errors[i]) << ','
       << detail::format_real(r.oracle_gaps[i]) << ',' << detail::format_real(r.mass_drifts[i]) << ',';
    if (i + 1 == r.taus.size()) os << detail::format_real(r.fitted_order);
    os << "\n";
  }
}

struct CsvRow {
  double tau;
  double error;
  double oracle_gap;
  double mass_drift;
  std::optional<double> fitted_order;
};

/// Parses a converge CSV back; rejects unknown schema versions.
inline std::vector<CsvRow> read_convergence_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != csv_schema_line) {
    throw std::runtime_error("missing '# nls-csv v1' schema line");
  }
  if (!std::getline(is, line) || line != "tau,error,oracle_gap,mass_drift,fitted_order") {
    throw std::runtime_error("unexpected CSV header");
  }
  std::vector<CsvRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 5) throw std::runtime_error("CSV row with " + std::to_string(cells.size()) + " cells");
    CsvRow row{std::stod(cells[0]), std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]), std::nullopt};
    if (!cells[4].empty()) row.fitted_order = std::stod(cells[4]);
    rows.push_back(row);
  }
  return rows;
}

inline json report_json(const ConvergenceReport& r) {
  json flags = json::array();
  for (bool b : r.oracle_flagged) flags.push_back(b);
  return {{"scheme", r.scheme},
          {"data_spec", r.data_spec},
          {"taus", r.taus},
          {"errors", r.errors},
          {"oracle_gaps", r.oracle_gaps},
          {"oracle_flagged", flags},
          {"mass_drifts", r.mass_drifts},
          {"fitted_order", r.fitted_order},
          {"fit_residual", r.fit_residual},
          {"excluded_coarsest", r.excluded_coarsest}};
}

struct ConvergeResult {
  std::vector<ConvergenceReport> reports;
  json summary;
  /// Most flagged points of any scheme.
  std::size_t worst_flagged = 0;
  std::size_t sweep_size = 0;

  /// More than half of some scheme's sweep rests on an untrusted oracle
  /// (CLI exit 4).
  bool oracle_failed() const { return 2 * worst_flagged > sweep_size; }
};

/// Shared comparison times k T / M. Every tau must divide T / M.
inline std::vector<double> sweep_snapshot_times(const ExperimentConfig& cfg) {
  const double horizon = cfg.split.horizon;
  const std::size_t m = cfg.sweep_snapshots.value_or(
      static_cast<std::size_t>(std::llround(horizon / cfg.taus.front())));
  if (m == 0) throw ConfigError("sweep needs at least one comparison interval");
  const double dt = horizon / static_cast<double>(m);
  for (double tau : cfg.taus) {
    const double ratio = dt / tau;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0) {
      throw ConfigError("tau = " + detail::format_real(tau) + " does not divide the comparison interval " +
                        detail::format_real(dt));
    }
  }
  std::vector<double> times;
  for (std::size_t k = 0; k <= m; ++k) times.push_back(dt * static_cast<double>(k));
  return times;
}

/// tau sweep for each scheme against one shared fine-Strang reference.
/// Writes convergence_<scheme>.csv and .json into cfg.output.
inline ConvergeResult run_converge(const ExperimentConfig& cfg, std::vector<Scheme> schemes = {}) {
  if (schemes.empty()) schemes = cfg.schemes;
  if (schemes.empty()) schemes = {cfg.split.scheme};
  if (cfg.taus.size() < 4) throw ConfigError("converge needs a sweep of at least 4 step sizes");
  detail::prepare_output_dir(cfg.output);

  const SpectralGrid grid = make_grid(cfg.dim, cfg.n_per_axis, cfg.half_width);
  const std::vector<double> times = sweep_snapshot_times(cfg);
  const std::size_t nt = cfg.taus.size();

  ConvergeResult result;
  json summary;
  summary["grid"] = detail::grid_json(grid);
  summary["data"] = detail::data_json(cfg.data);

  std::vector<ConvergenceReport> reports(schemes.size());
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    auto& r = reports[s];
    r.scheme = to_string(schemes[s]);
    r.data_spec = detail::data_json(cfg.data).dump();
    r.taus = cfg.taus;
    r.errors.assign(nt, 0.0);
    r.oracle_gaps.assign(nt, 0.0);
    r.mass_drifts.assign(nt, 0.0);
    r.oracle_flagged.assign(nt, false);
  }

  if (cfg.synthetic_order) {
    for (auto& r : reports) {
      for (std::size_t i = 0; i < nt; ++i) r.errors[i] = std::pow(cfg.taus[i], *cfg.synthetic_order);
    }
    summary["synthetic_order"] = *cfg.synthetic_order;
  } else {
    ComplexField phi = [&] {
      try {
        return realize(grid, cfg.data);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }();

    SplitConfig base = cfg.split;
    base.tau = cfg.taus.back();
    base.snapshot_times = times;
    base.tilde_tau.reset();
    const double ceiling = cfg.oracle_ceiling();
    const Trajectory ref = reference_solution(phi, base, cfg.reference_levels, ceiling);
    const double gap = *ref.oracle_self_gap;
    summary["reference"] = {{"levels", cfg.reference_levels},
                            {"tau", ref.config.tau},
                            {"self_gap", gap},
                            {"ceiling", ceiling},
                            {"warnings", ref.warnings}};

    parallel_for(schemes.size() * nt, cfg.workers, [&](std::size_t cell) {
      const std::size_t s = cell / nt;
      const std::size_t i = cell % nt;
      SplitConfig sc = cfg.split;
      sc.scheme = schemes[s];
      sc.tau = cfg.taus[i];
      sc.snapshot_times = times;
      sc.tilde_tau.reset();
      const Trajectory traj = evolve(phi, sc);
      auto& r = reports[s];
      r.errors[i] = measure_error(traj, ref);
      r.mass_drifts[i] = mass_drift(traj);
      r.oracle_gaps[i] = gap;
      // The point is trusted only if the oracle is certified and its gap
      // is an order of magnitude below the measured error.
      r.oracle_flagged[i] = ref.oracle_flagged || !(r.errors[i] >= 10.0 * gap);
    });
  }

  std::size_t worst_flagged = 0;
  json per_scheme = json::array();
  for (auto& r : reports) {
    try {
      const OrderFit fit = fit_order(r);
      r.fitted_order = fit.order;
      r.fit_residual = fit.residual;
      r.excluded_coarsest = fit.excluded_coarsest;
    } catch (const std::invalid_argument&) {
      r.fitted_order = std::numeric_limits<double>::quiet_NaN();
      r.fit_residual = std::numeric_limits<double>::quiet_NaN();
    }
    const auto flagged = static_cast<std::size_t>(std::count(r.oracle_flagged.begin(), r.oracle_flagged.end(), true));
    worst_flagged = std::max(worst_flagged, flagged);

    {
      std::ofstream os(cfg.output / ("convergence_" + r.scheme + ".csv"));
      write_convergence_csv(os, r);
      if (!os) throw std::runtime_error("failed writing CSV");
    }
    json j = report_json(r);
    j["grid"] = summary["grid"];
    j["data"] = summary["data"];
    if (summary.contains("reference")) j["reference"] = summary["reference"];
    j["config"] = cfg.source;
    {
      std::ofstream os(cfg.output / ("convergence_" + r.scheme + ".json"));
      os << j.dump(2) << "\n";
    }
    per_scheme.push_back({{"scheme", r.scheme}, {"fitted_order", r.fitted_order}, {"flagged", flagged}});
  }
  summary["schemes"] = per_scheme;
  summary["oracle_failed"] = 2 * worst_flagged > nt;
  result.reports = std::move(reports);
  result.summary = std::move(summary);
  result.worst_flagged = worst_flagged;
  result.sweep_size = nt;
  return result;
}

}  // namespace nls
