#include <doctest.h>

#include <clocale>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mslab/harness.hpp"

using namespace mslab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("every scenario runs a tiny config") {
  const std::vector<std::pair<std::string, std::string>> configs{
      {"corral-pareto", R"({"scenario": "corral-pareto", "T": 50, "seed": 1,
         "environment": {"class_sizes": [1, 4], "variants": ["A"]}})"},
      {"exp4-standalone", R"({"scenario": "exp4-standalone", "T": 50, "seed": 1})"},
      {"sswitch-tradeoff", R"({"scenario": "sswitch-tradeoff", "T": 50, "seed": 1})"},
      {"bob-adaptive-vs-oblivious", R"({"scenario": "bob-adaptive-vs-oblivious", "T": 64, "seed": 1})"},
      {"lowerbound-tradeoff", R"({"scenario": "lowerbound-tradeoff", "T": 50, "seed": 1,
         "environment": {"k": 4, "env_indices": [0, 2]}})"},
      {"fullinfo-wrapper-demo", R"({"scenario": "fullinfo-wrapper-demo", "T": 100, "seed": 1,
         "environment": {"k": 4}})"},
  };
  std::set<std::string> seen;
  for (const auto& [id, text] : configs) {
    CAPTURE(id);
    const auto rows = run_scenario_rows(parse_config(text));
    REQUIRE(!rows.empty());
    for (const auto& r : rows) {
      CHECK(r.scenario == id);
      CHECK(r.horizon == parse_config(text).horizon);
      CHECK(r.wall_ms == 0.0);
      for (double g : r.regrets) CHECK(std::isfinite(g));
    }
    seen.insert(id);
  }
  for (const auto& s : list_scenarios()) {
    if (s.id != "tv-check") CHECK(seen.count(s.id) == 1);
  }
}

TEST_CASE("identical configs give byte-identical CSV, with or without threads") {
  const std::string base = R"({"scenario": "sswitch-tradeoff", "T": 300, "seed": 42, "replications": 3,
    "sweep": {"param": "learning_rate", "values": [1e-4, 1e-2]})";
  const auto a = format_csv(run_scenario_rows(parse_config(base + "}")));
  const auto b = format_csv(run_scenario_rows(parse_config(base + "}")));
  const auto c = format_csv(run_scenario_rows(parse_config(base + R"(, "threads": 4})")));
  CHECK(a == b);
  CHECK(a == c);
  const auto d = format_csv(run_scenario_rows(parse_config(R"({"scenario": "sswitch-tradeoff", "T": 300, "seed": 43,
    "replications": 3, "sweep": {"param": "learning_rate", "values": [1e-4, 1e-2]}})")));
  CHECK(a != d);
}

TEST_CASE("sweep grid shape and common random numbers") {
  const auto cfg = parse_config(R"({"scenario": "lowerbound-tradeoff", "T": 40, "seed": 9, "replications": 2,
    "environment": {"k": 4, "env_indices": [1, 3]}, "sweep": {"param": "budget", "values": [0, 5, 10]}})");
  const auto rows = run_scenario_rows(cfg);
  REQUIRE(rows.size() == 3 * 2 * 2);
  CHECK(rows[0].sweep_param == "budget");
  CHECK(rows[0].sweep_value == "0");
  CHECK(rows[4].sweep_value == "5");
  CHECK(rows[1].env == "E1");
  CHECK(rows[2].env == "E3");
  // same (variant, replication) cell seeds across sweep values
  CHECK(rows[0].seed == rows[4].seed);
  CHECK(rows[0].seed != rows[1].seed);
  for (const auto& r : rows) CHECK(r.reveals <= std::stoll(r.sweep_value));
}

TEST_CASE("csv schema") {
  CHECK(csv_header(2) == "scenario,seed,sweep_param,sweep_value,agent,env,T,regret_pi1,regret_pi2,reveals,phases,wall_ms\n");
  ResultRow r;
  r.scenario = "x";
  r.seed = 7;
  r.agent = "a,b";
  r.env = "E0";
  r.horizon = 10;
  r.regrets = {1.5, -0.25};
  const auto csv = format_csv({r});
  CHECK(csv == csv_header(2) + "x,7,,,\"a,b\",E0,10,1.5,-0.25,0,0,0\n");

  const auto tv = format_tv_csv({tv_check(2, 1, 0.25, 1000, 0)});
  CHECK(tv.rfind("k,N,Delta,exact_tv,lr_gap,analytic_bound,lr_gap_se\n", 0) == 0);
  CHECK(tv.find("2,1,0.25,0.0625,0.0625,") != std::string::npos);
}

TEST_CASE("tv check falls back to Monte Carlo over budget") {
  const auto row = tv_check(30000, 8, 0.25, 2000, 3);
  CHECK(!row.exact_tv.has_value());
  CHECK(row.lr_gap_se > 0.0);
  REQUIRE(row.analytic_bound.has_value());
  CHECK(*row.analytic_bound == doctest::Approx(0.779).epsilon(1e-3));
  CHECK(!tv_check(1, 2, 0.1, 1000, 0).analytic_bound.has_value());
}

TEST_CASE("format_double is locale independent and round-trips") {
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = old ? old : "C";
  std::setlocale(LC_NUMERIC, "de_DE.UTF-8");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5e-7) == "-2.5e-07");
  std::setlocale(LC_NUMERIC, saved.c_str());
  for (double v : {1.0 / 3.0, 1e300, 123456.789, -0.0625}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(0.0) == "0");
}

TEST_CASE("config errors name the field or position") {
  CHECK(error_of(R"({"scenario": "nope", "T": 5})").find("scenario") != std::string::npos);
  CHECK(error_of(R"({"scenario": "exp4-standalone"})").find("'T'") != std::string::npos);
  CHECK(error_of(R"({"scenario": "exp4-standalone", "T": 0})").find("'T'") != std::string::npos);
  CHECK(error_of(R"({"scenario": "exp4-standalone", "T": 5, "replications": 0})").find("replications") != std::string::npos);
  CHECK(error_of(R"({"scenario": "exp4-standalone", "T": 5, "bogus": 1})").find("bogus") != std::string::npos);
  CHECK(error_of(R"({"scenario": "exp4-standalone", "T": 5, "environment": {"arms": "x"}})").find("environment.arms") !=
        std::string::npos);
  CHECK(error_of(R"({"scenario": "exp4-standalone", "T": 5, "agent": {"zzz": 1}})").find("agent.zzz") != std::string::npos);
  CHECK(error_of(R"({"scenario": "exp4-standalone", "T": 5, "sweep": {"param": "zzz", "values": [1]}})")
            .find("sweep.param") != std::string::npos);
  CHECK(error_of(R"({"scenario": "sswitch-tradeoff", "T": 5, "sweep": {"param": "learning_rate", "values": [0.1, 0.1]}})")
            .find("duplicate") != std::string::npos);
  const auto malformed = error_of("{\n  \"scenario\": \"exp4-standalone\",\n  \"T\": 5,,\n}");
  CHECK(malformed.find("line 3") != std::string::npos);
  CHECK(malformed.find("column") != std::string::npos);
  CHECK_THROWS_AS(run_scenario_rows(parse_config(R"({"scenario": "corral-pareto", "T": 5,
    "environment": {"variants": ["Z"]}})")), ConfigError);
}

TEST_CASE("atomic write replaces the target") {
  const auto dir = std::filesystem::temp_directory_path() / "mslab_harness_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.csv";
  write_file_atomic(path, "old\n");
  write_file_atomic(path, "new\n");
  CHECK(slurp(path) == "new\n");
  CHECK(!std::filesystem::exists(dir / "out.csv.tmp"));

  auto cfg = parse_config(R"({"scenario": "exp4-standalone", "T": 20, "seed": 2, "replications": 2})");
  CHECK(run_scenario(cfg, path) == 2);
  CHECK(slurp(path).rfind("scenario,seed,", 0) == 0);
  cfg.output.clear();
  CHECK_THROWS_AS(run_scenario(cfg), ConfigError);
  std::filesystem::remove_all(dir);
}
