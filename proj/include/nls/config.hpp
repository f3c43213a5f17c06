#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nls/initial_data.hpp"
#include "nls/integrators.hpp"

namespace nls {

/// Invalid experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration with dotted namespaces:
//
//   # comment
//   grid.n = 512
//
// Blank lines and '#' comments are ignored; keys may not repeat.
using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

inline KeyValues parse_key_values(std::istream& is) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

inline KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  return parse_key_values(is);
}

struct ExperimentConfig {
  int dim = 1;
  std::size_t n_per_axis = 256;
  double half_width = 16.0;

  DataSpec data = GaussianSpec{};
  SplitConfig split;
  std::vector<Scheme> schemes;

  /// Strictly decreasing step sizes for converge.
  std::vector<double> taus;
  /// Number of equal intervals of [0, T] at which errors are compared.
  std::optional<std::size_t> sweep_snapshots;
  /// Snapshot every k steps in simulate (0: only endpoints).
  std::size_t snapshot_every = 0;

  int reference_levels = 2;
  std::optional<double> reference_ceiling;
  bool reference_requested = false;

  std::filesystem::path output;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  /// Harness self-test: errors are planted as tau^order instead of computed.
  std::optional<double> synthetic_order;

  KeyValues source;

  double oracle_ceiling() const {
    if (reference_ceiling) return *reference_ceiling;
    return is_rough(data) ? rough_oracle_ceiling : smooth_oracle_ceiling;
  }
};

namespace detail {

class KeyReader {
 public:
  explicit KeyReader(const KeyValues& kv) : kv_(kv) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (auto it = kv_.find(key); it != kv_.end()) return it->second;
    return std::nullopt;
  }
  double real(const std::string& key, double fallback) {
    auto v = raw(key);
    return v ? to_real(key, *v) : fallback;
  }
  std::optional<double> maybe_real(const std::string& key) {
    auto v = raw(key);
    if (!v) return std::nullopt;
    return to_real(key, *v);
  }
  long integer(const std::string& key, long fallback) {
    auto v = raw(key);
    return v ? to_integer(key, *v) : fallback;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    auto v = raw(key);
    return v ? *v : fallback;
  }
  std::vector<double> reals(const std::string& key) {
    std::vector<double> out;
    if (auto v = raw(key)) {
      for (const auto& item : split_list(*v)) out.push_back(to_real(key, item));
    }
    return out;
  }
  void reject_unknown() const {
    for (const auto& [key, value] : kv_) {
      if (!used_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }

  static double to_real(const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      const double x = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': '" + s + "' is not a number");
    }
  }
  static long to_integer(const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      const long x = std::stol(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
    }
  }

 private:
  const KeyValues& kv_;
  std::set<std::string> used_;
};

}  // namespace detail

/// Builds and validates an experiment from key/value pairs. Throws
/// ConfigError on any problem.
inline ExperimentConfig parse_experiment(const KeyValues& kv) {
  ExperimentConfig cfg;
  cfg.source = kv;
  detail::KeyReader rd(kv);
  try {
    cfg.seed = static_cast<std::uint64_t>(rd.integer("seed", 1));
    cfg.dim = static_cast<int>(rd.integer("grid.dim", 1));
    cfg.n_per_axis = static_cast<std::size_t>(rd.integer("grid.n", 256));
    cfg.half_width = rd.real("grid.half_width", 16.0);
    (void)make_grid(cfg.dim, cfg.n_per_axis, cfg.half_width);

    const std::string kind = rd.text("data.kind", "gaussian");
    const double normalization = rd.real("data.normalization", 1.0);
    if (kind == "gaussian") {
      cfg.data = GaussianSpec{rd.real("data.width", 1.0), rd.real("data.amplitude", 1.0)};
    } else if (kind == "plane_wave") {
      PlaneWaveSpec pw;
      pw.amplitude = rd.real("data.amplitude", 1.0);
      for (double m : rd.reals("data.mode")) pw.mode.push_back(static_cast<long>(m));
      if (pw.mode.empty()) pw.mode.assign(cfg.dim, 0);
      cfg.data = pw;
    } else if (kind == "hs_rough") {
      cfg.data = HsRoughSpec{rd.real("data.s", 0.5),
                             static_cast<std::uint64_t>(rd.integer("data.seed", static_cast<long>(cfg.seed))),
                             normalization};
    } else if (kind == "phi_alpha") {
      cfg.data = PhiAlphaSpec{rd.real("data.alpha", 1.0), normalization};
    } else {
      throw ConfigError("unknown data.kind '" + kind + "'");
    }

    auto& sp = cfg.split;
    sp.scheme = parse_scheme(rd.text("scheme", "lie"));
    sp.lambda = rd.real("lambda", 1.0);
    sp.p = rd.real("p", 2.0);
    sp.tau = rd.real("tau", 1e-2);
    sp.horizon = rd.real("horizon", 1.0);
    sp.tilde_tau = rd.maybe_real("tilde_tau");
    sp.linear_only = rd.text("linear_only", "false") == "true";

    const std::string rule = rd.text("filter.rule", "tau");
    const auto value = rd.maybe_real("filter.value");
    auto need_value = [&]() {
      if (!value) throw ConfigError("filter.rule = " + rule + " needs filter.value");
      return *value;
    };
    if (rule == "tau") {
      sp.filter_rule = StepScale{};
    } else if (rule == "fixed") {
      sp.filter_rule = FixedScale{need_value()};
    } else if (rule == "power") {
      sp.filter_rule = PowerScale{need_value()};
    } else if (rule == "log") {
      sp.filter_rule = LogScale{need_value()};
    } else {
      throw ConfigError("unknown filter.rule '" + rule + "'");
    }

    sp.snapshot_times = rd.reals("snapshots.times");
    cfg.snapshot_every = static_cast<std::size_t>(rd.integer("snapshots.every", 0));

    if (auto list = rd.raw("schemes")) {
      for (const auto& name : detail::split_list(*list)) cfg.schemes.push_back(parse_scheme(name));
    }

    cfg.taus = rd.reals("taus");
    const auto start = rd.maybe_real("sweep.start");
    const double factor = rd.real("sweep.factor", 0.5);
    const long count = rd.integer("sweep.count", 0);
    if (cfg.taus.empty() && start) {
      if (!(factor > 0.0 && factor < 1.0)) throw ConfigError("sweep.factor must lie in (0, 1)");
      if (count < 1) throw ConfigError("sweep.count must be positive");
      for (long i = 0; i < count; ++i) cfg.taus.push_back(*start * std::pow(factor, static_cast<double>(i)));
    }
    for (std::size_t i = 0; i < cfg.taus.size(); ++i) {
      if (!(cfg.taus[i] > 0.0)) throw ConfigError("sweep step sizes must be positive");
      if (i > 0 && !(cfg.taus[i] < cfg.taus[i - 1])) throw ConfigError("sweep must be strictly decreasing");
    }
    if (auto m = rd.integer("sweep.snapshots", 0); m > 0) cfg.sweep_snapshots = static_cast<std::size_t>(m);

    cfg.reference_requested = rd.raw("reference.levels").has_value();
    cfg.reference_levels = static_cast<int>(rd.integer("reference.levels", 2));
    cfg.reference_ceiling = rd.maybe_real("reference.ceiling");
    if (cfg.reference_levels < 2) throw ConfigError("reference.levels must be >= 2");

    cfg.output = rd.text("output", "");
    cfg.workers = static_cast<unsigned>(rd.integer("workers", 0));
    cfg.synthetic_order = rd.maybe_real("converge.synthetic_order");
    rd.reject_unknown();

    sp.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return parse_experiment(load_key_values(path));
}

}  // namespace nls
