#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mslab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepAxis {
  std::string param;                  // empty: a single cell, no sweep
  std::vector<nlohmann::json> values;
};

struct ExperimentConfig {
  std::string scenario;
  std::int64_t horizon = 0;
  int replications = 1;
  std::optional<std::uint64_t> seed;
  SweepAxis sweep;
  nlohmann::json environment = nlohmann::json::object();
  nlohmann::json agent = nlohmann::json::object();
  std::string output;
  bool record_wall_time = false;
  int threads = 1;
};

// Parses and validates. Errors name the field, or the line and column for
// malformed JSON.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

struct ResultRow {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string sweep_param;
  std::string sweep_value;
  std::string agent;
  std::string env;
  std::int64_t horizon = 0;
  std::vector<double> regrets;  // one per policy class, Pi_1 first
  std::int64_t reveals = 0;
  std::int64_t phases = 0;
  double wall_ms = 0.0;
  // grid position, used for ordering only
  std::size_t grid = 0, variant = 0, replication = 0, agent_slot = 0;
};

struct ScenarioInfo {
  std::string id;
  std::string description;
  nlohmann::json environment_defaults;
  nlohmann::json agent_defaults;
};

std::vector<ScenarioInfo> list_scenarios();

// Runs the whole grid (sweep values x environment variants x replications)
// and returns rows sorted by grid position.
std::vector<ResultRow> run_scenario_rows(const ExperimentConfig& config);

std::string csv_header(std::size_t num_classes);
std::string format_csv(const std::vector<ResultRow>& rows);

// Locale-independent shortest round-trip form.
std::string format_double(double value);

// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Runs the scenario and writes its CSV to `out` (or config.output).
// Returns the number of data rows written.
std::size_t run_scenario(const ExperimentConfig& config, const std::filesystem::path& out = {});

// ---- tv-check ------------------------------------------------------------

struct TvRow {
  int k = 0;
  int n = 0;
  double delta = 0.0;
  std::optional<double> exact_tv;  // empty when enumeration is over budget
  double lr_gap = 0.0;             // exact when enumerable, Monte Carlo otherwise
  double lr_gap_se = 0.0;          // 0 for the exact path
  std::optional<double> analytic_bound;  // needs k >= 2
};

TvRow tv_check(int k, int n, double delta, std::int64_t mc_trials, std::uint64_t seed);
std::string format_tv_csv(const std::vector<TvRow>& rows);

}  // namespace mslab
