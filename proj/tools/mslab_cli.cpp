#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mslab/harness.hpp"
#include "mslab/tv_oracle.hpp"

namespace {

std::uint64_t seed_from_env() {
  const char* s = std::getenv("RNG_SEED");
  if (!s || !*s) return 0;
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw mslab::ConfigError(std::string("RNG_SEED is not an unsigned integer: ") + s);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mslab: bandit model-selection experiments"};
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "run a scenario config and write its CSV");
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_path;
  simulate->add_option("--config", config_path, "experiment config (JSON)")->required();
  auto* seed_opt = simulate->add_option("--seed", seed, "root seed (overrides config and RNG_SEED)");
  simulate->add_option("--out", out_path, "output CSV (overrides config)");

  auto* tv = app.add_subcommand("tv-check", "exact / Monte Carlo TV check at one (k, N, Delta)");
  int k = 2;
  int n = 1;
  double delta = 0.1;
  std::int64_t trials = 10000;
  tv->add_option("--k", k, "number of projection policies")->required();
  tv->add_option("--n", n, "samples per coordinate N")->required();
  tv->add_option("--delta", delta, "gap Delta")->required();
  tv->add_option("--mc-trials", trials, "Monte Carlo trials when enumeration is over budget");
  auto* tv_seed = tv->add_option("--seed", seed, "seed for the Monte Carlo path");

  app.add_subcommand("list-scenarios", "print the scenario registry");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      auto config = mslab::load_config(config_path);
      if (seed_opt->count()) {
        config.seed = seed;
      } else if (!config.seed) {
        config.seed = seed_from_env();
      }
      const auto rows = mslab::run_scenario(config, out_path);
      std::cerr << "wrote " << rows << " rows to " << (out_path.empty() ? config.output : out_path) << "\n";
    } else if (tv->parsed()) {
      const std::uint64_t s = tv_seed->count() ? seed : seed_from_env();
      std::cout << mslab::format_tv_csv({mslab::tv_check(k, n, delta, trials, s)});
    } else {
      for (const auto& s : mslab::list_scenarios()) std::cout << s.id << "\t" << s.description << "\n";
    }
  } catch (const mslab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
