// nls: simulate / converge / verify driver.
//
// Exit codes: 0 success, 1 verify check failed, 2 invalid config,
// 3 non-finite values during evolution, 4 oracle flagged on most of a sweep.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nls/nls.hpp"

namespace {

nls::ExperimentConfig load(const std::string& path, const std::string& out, std::optional<long> seed) {
  nls::KeyValues kv = nls::load_key_values(path);
  kv["output"] = out;
  if (seed) kv["seed"] = std::to_string(*seed);
  return nls::parse_experiment(kv);
}

std::vector<std::string> split_commas(const std::string& s) { return nls::detail::split_list(s); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split-step spectral solver for the nonlinear Schroedinger equation"};
  app.require_subcommand(1);

  std::optional<long> seed;
  app.add_option("--seed", seed, "override the config seed");

  std::string config_path;
  std::string out_dir;
  std::string schemes_arg;
  std::string suites_arg;

  auto* simulate = app.add_subcommand("simulate", "evolve once and dump snapshots");
  simulate->add_option("--config", config_path, "config file")->required();
  simulate->add_option("--out", out_dir, "output directory")->required();

  auto* converge = app.add_subcommand("converge", "tau sweep against a fine reference");
  converge->add_option("--config", config_path, "config file")->required();
  converge->add_option("--out", out_dir, "output directory")->required();
  converge->add_option("--schemes", schemes_arg, "comma list of lie,strang,filtered_lie");

  auto* verify = app.add_subcommand("verify", "run identity and property suites");
  verify->add_option("--suite", suites_arg, "comma list of mass,duhamel,bernstein,mvt,plane_wave,pairs")
      ->required();

  for (auto* sub : {simulate, converge, verify}) sub->add_option("--seed", seed, "override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) {
      const auto cfg = load(config_path, out_dir, seed);
      const auto manifest = nls::run_simulate(cfg);
      for (const auto& w : manifest["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
      std::cout << "wrote " << manifest["snapshots"].size() << " snapshots to " << out_dir << "\n";
      if (manifest.contains("analytic_error")) {
        std::cout << "analytic_error " << manifest["analytic_error"].get<double>() << "\n";
      }
      return 0;
    }
    if (*converge) {
      const auto cfg = load(config_path, out_dir, seed);
      std::vector<nls::Scheme> schemes;
      for (const auto& name : split_commas(schemes_arg)) schemes.push_back(nls::parse_scheme(name));
      const auto result = nls::run_converge(cfg, schemes);
      for (const auto& r : result.reports) {
        std::cout << r.scheme << " fitted_order " << r.fitted_order << "\n";
      }
      if (result.oracle_failed()) {
        std::cerr << "error: oracle flagged on " << result.worst_flagged << " of " << result.sweep_size
                  << " sweep points\n";
        return 4;
      }
      return 0;
    }
    const auto suites = split_commas(suites_arg);
    const auto records = nls::run_verify(suites, seed ? static_cast<std::uint64_t>(*seed) : 1);
    bool all = true;
    for (const auto& r : records) {
      std::cout << nls::to_json(r).dump() << "\n";
      all = all && r.pass;
    }
    return all ? 0 : 1;
  } catch (const nls::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nls::NumericGuardError& e) {
    std::cerr << "numeric guard: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
