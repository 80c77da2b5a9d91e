#include "mslab/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "mslab/agents.hpp"
#include "mslab/corral.hpp"
#include "mslab/environments.hpp"
#include "mslab/fullinfo.hpp"
#include "mslab/learners.hpp"
#include "mslab/simulation.hpp"
#include "mslab/tv_oracle.hpp"

namespace mslab {

using nlohmann::json;

namespace {

// ---- parameter access ----------------------------------------------------

struct Params {
  const json& env;
  const json& agent;

  const json& at(const std::string& key) const {
    if (env.contains(key)) return env.at(key);
    return agent.at(key);
  }
  double real(const std::string& key) const { return at(key).get<double>(); }
  std::int64_t integer(const std::string& key) const { return at(key).get<std::int64_t>(); }
  std::string text(const std::string& key) const { return at(key).get<std::string>(); }
  template <class T>
  std::vector<T> list(const std::string& key) const {
    return at(key).get<std::vector<T>>();
  }
};

struct Cell {
  Params params;
  std::int64_t horizon;
  std::uint64_t seed;
  std::string variant;
};

struct Outcome {
  std::string agent;
  std::vector<double> regrets;
  std::int64_t reveals = 0;
  std::int64_t phases = 0;
};

struct Scenario {
  ScenarioInfo info;
  std::function<std::vector<std::string>(const Params&)> variants;
  std::function<std::vector<Outcome>(const Cell&)> run;
};

// ---- policy classes for the stochastic scenarios ---------------------------

// All K^C tables in a seeded shuffled order, truncated to `count`.
std::vector<Policy> table_policies(int arms, int contexts, std::size_t count, std::uint64_t class_seed) {
  const double total = std::pow(static_cast<double>(arms), contexts);
  if (total > 1e6) throw ConfigError("table class too large: arms^contexts must be <= 1e6");
  if (static_cast<double>(count) > total) {
    throw ConfigError("class size " + std::to_string(count) + " exceeds the " + std::to_string(static_cast<long>(total)) +
                      " distinct tables");
  }
  std::vector<std::size_t> codes(static_cast<std::size_t>(total));
  std::iota(codes.begin(), codes.end(), std::size_t{0});
  Rng rng(class_seed);
  for (std::size_t i = codes.size(); i > 1; --i) std::swap(codes[i - 1], codes[rng.uniform_index(i)]);
  std::vector<Policy> out;
  for (std::size_t j = 0; j < count; ++j) {
    TablePolicy p;
    std::size_t code = codes[j];
    for (int c = 0; c < contexts; ++c) {
      p.table[Categorical{c}] = Arm{static_cast<int>(code % static_cast<std::size_t>(arms))};
      code /= static_cast<std::size_t>(arms);
    }
    out.emplace_back(std::move(p));
  }
  return out;
}

std::vector<std::vector<double>> means_for(const Policy& best, int arms, int contexts, double gap) {
  std::vector<std::vector<double>> means(static_cast<std::size_t>(contexts), std::vector<double>(static_cast<std::size_t>(arms), 0.5));
  for (int c = 0; c < contexts; ++c) {
    const int a = evaluate_policy(best, Categorical{c}).index;
    means[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)] = 0.5 - gap;
  }
  return means;
}

int disagreements(const Policy& a, const Policy& b, int contexts) {
  int d = 0;
  for (int c = 0; c < contexts; ++c) d += evaluate_policy(a, Categorical{c}) != evaluate_policy(b, Categorical{c});
  return d;
}

// ---- scenarios -------------------------------------------------------------

Scenario corral_pareto() {
  Scenario s;
  s.info = {"corral-pareto",
            "Hedged-FTRL over nested EXP4 bases; env A has the best policy in Pi_1, env B only in the largest class",
            json{{"arms", 4}, {"contexts", 4}, {"class_sizes", {1, 256}}, {"gap", 0.2}, {"class_seed", 7},
                 {"variants", {"A", "B"}}},
            json{{"tradeoff", 1.0}, {"complexity_multiplier", 3.0}, {"eta", 0.0}}};
  s.variants = [](const Params& p) { return p.list<std::string>("variants"); };
  s.run = [](const Cell& cell) {
    const auto& p = cell.params;
    const int arms = static_cast<int>(p.integer("arms"));
    const int contexts = static_cast<int>(p.integer("contexts"));
    const auto sizes = p.list<std::size_t>("class_sizes");
    const double gap = p.real("gap");
    if (sizes.empty() || !std::is_sorted(sizes.begin(), sizes.end()) || sizes.front() < 1) {
      throw ConfigError("field 'class_sizes': need a non-empty ascending list of positive sizes");
    }
    const auto all = table_policies(arms, contexts, sizes.back(), static_cast<std::uint64_t>(p.integer("class_seed")));
    std::vector<PolicyClass> classes;
    for (std::size_t m = 0; m < sizes.size(); ++m) {
      classes.emplace_back("Pi" + std::to_string(m + 1), std::vector<Policy>(all.begin(), all.begin() + static_cast<long>(sizes[m])));
    }
    Policy best = all.front();
    if (cell.variant == "B") {
      if (sizes.size() < 2) throw ConfigError("variant B needs at least two classes");
      const std::size_t from = sizes[sizes.size() - 2];
      std::size_t pick = from;
      for (std::size_t j = from; j < all.size(); ++j) {
        if (disagreements(all[j], all.front(), contexts) > disagreements(all[pick], all.front(), contexts)) pick = j;
        if (disagreements(all[pick], all.front(), contexts) == contexts) break;
      }
      best = all[pick];
    } else if (cell.variant != "A") {
      throw ConfigError("field 'variants': unknown corral-pareto variant '" + cell.variant + "'");
    }
    StochasticContextualEnv env(means_for(best, arms, contexts, gap), {}, cell.variant);

    std::vector<double> complexities;
    for (const auto& c : classes) complexities.push_back(c.complexity() * p.real("complexity_multiplier"));
    CorralTuning tuning = tune_from_budgets(complexities, p.real("tradeoff"), cell.horizon);
    if (p.real("eta") > 0.0) tuning.eta = p.real("eta");
    std::vector<std::unique_ptr<BaseLearner>> bases;
    for (const auto& c : classes) bases.push_back(std::make_unique<Exp4>(c, arms));
    CorralAgent agent(std::move(bases), tuning, cell.seed);
    Rng env_rng(cell.seed, stream::environment);
    Rng agent_rng(cell.seed, stream::agent);
    const auto trace = simulate(env, agent, cell.horizon, env_rng, agent_rng);
    Outcome out{"hedged-corral", {}, 0, 0};
    for (const auto& c : classes) out.regrets.push_back(pseudo_regret(trace, c, env.oracle()));
    return std::vector<Outcome>{out};
  };
  return s;
}

Scenario exp4_standalone() {
  Scenario s;
  s.info = {"exp4-standalone", "EXP4 alone on a stochastic contextual bandit whose best policy is in the class",
            json{{"arms", 3}, {"contexts", 4}, {"policies", 8}, {"gap", 0.2}, {"class_seed", 11}},
            json{{"learning_rate", 0.0}}};
  s.variants = [](const Params&) { return std::vector<std::string>{"stochastic"}; };
  s.run = [](const Cell& cell) {
    const auto& p = cell.params;
    const int arms = static_cast<int>(p.integer("arms"));
    const int contexts = static_cast<int>(p.integer("contexts"));
    PolicyClass cls("Pi", table_policies(arms, contexts, static_cast<std::size_t>(p.integer("policies")),
                                         static_cast<std::uint64_t>(p.integer("class_seed"))));
    StochasticContextualEnv env(means_for(cls[0], arms, contexts, p.real("gap")));
    Exp4::Options opt;
    if (p.real("learning_rate") > 0.0) opt.fixed_learning_rate = p.real("learning_rate");
    BaseAgent agent(std::make_unique<Exp4>(cls, arms, opt), cell.seed);
    Rng env_rng(cell.seed, stream::environment);
    Rng agent_rng(cell.seed, stream::agent);
    const auto trace = simulate(env, agent, cell.horizon, env_rng, agent_rng);
    return std::vector<Outcome>{{"exp4", {pseudo_regret(trace, cls, env.oracle())}, 0, 0}};
  };
  return s;
}

// Class of all constant arms, used as the fixed-arm comparator.
PolicyClass constant_arms(int arms) {
  std::vector<Policy> ps;
  for (int a = 0; a < arms; ++a) ps.emplace_back(ConstantArm{Arm{a}});
  return PolicyClass("arms", std::move(ps));
}

Scenario sswitch_tradeoff() {
  Scenario s;
  s.info = {"sswitch-tradeoff",
            "Adaptive S-switch adversary: regret against the fixed last arm versus switches completed",
            json{{"arms", 4}, {"switches", 5}, {"delta", 0.1}},
            json{{"agents", {"fixed-last", "exp3-anchored"}},
                 {"exploration", 1e-3},
                 {"learning_rate", 1e-4},
                 {"anchor_mass", 0.99999}}};
  s.variants = [](const Params&) { return std::vector<std::string>{"sswitch"}; };
  s.run = [](const Cell& cell) {
    const auto& p = cell.params;
    const int arms = static_cast<int>(p.integer("arms"));
    const int switches = static_cast<int>(p.integer("switches"));
    const double delta = p.real("delta");
    std::vector<Outcome> outs;
    for (const auto& kind : p.list<std::string>("agents")) {
      Rng setup(cell.seed, stream::environment_setup);
      SwitchAdversary env(arms, switches, delta, setup);
      std::unique_ptr<Agent> agent;
      if (kind == "fixed-last") {
        agent = std::make_unique<FixedArmAgent>(Arm{arms - 1});
      } else if (kind == "exp3-anchored" || kind == "exp3") {
        // initial distribution: anchor_mass on the last arm, the rest spread evenly
        std::vector<double> prior(static_cast<std::size_t>(arms), 0.0);
        if (kind == "exp3-anchored") {
          const double mass = p.real("anchor_mass");
          if (!(mass > 0.0 && mass < 1.0)) throw ConfigError("field 'anchor_mass': must lie in (0, 1)");
          for (int a = 0; a < arms - 1; ++a) prior[static_cast<std::size_t>(a)] = std::log((1.0 - mass) / (arms - 1));
          prior.back() = std::log(mass);
        }
        double eta = p.real("learning_rate");
        if (!(eta > 0.0)) eta = std::sqrt(2.0 * std::log(arms) / (arms * static_cast<double>(cell.horizon)));
        agent = std::make_unique<Exp3Agent>(Exp3(arms, eta, p.real("exploration"), prior), kind);
      } else {
        throw ConfigError("field 'agents': unknown agent '" + kind + "'");
      }
      Rng env_rng(cell.seed, stream::environment);
      Rng agent_rng(cell.seed, stream::agent);
      const auto trace = simulate(env, *agent, cell.horizon, env_rng, agent_rng);
      PolicyClass last("last-arm", {ConstantArm{Arm{arms - 1}}});
      outs.push_back({kind,
                      {pseudo_regret(trace, last, env.oracle()), per_context_best_regret(trace, arms, env.oracle())},
                      0,
                      env.switches_completed()});
    }
    return outs;
  };
  return s;
}

Scenario bob_demo() {
  Scenario s;
  s.info = {"bob-adaptive-vs-oblivious",
            "Bandit-over-bandit against an oblivious switching environment and the adaptive S-switch adversary",
            json{{"arms", 4}, {"delta", 0.45}, {"switches", 0}, {"oblivious_phases", 4}, {"variants", {"oblivious", "adaptive"}}},
            json{{"epoch_length", 0}}};
  s.variants = [](const Params& p) { return p.list<std::string>("variants"); };
  s.run = [](const Cell& cell) {
    const auto& p = cell.params;
    const int arms = static_cast<int>(p.integer("arms"));
    const double delta = p.real("delta");
    std::int64_t epoch = p.integer("epoch_length");
    if (epoch <= 0) epoch = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(cell.horizon))));
    Rng setup(cell.seed, stream::environment_setup);
    std::unique_ptr<Environment> env;
    std::function<std::int64_t()> phases;
    if (cell.variant == "adaptive") {
      int switches = static_cast<int>(p.integer("switches"));
      if (switches <= 0) switches = static_cast<int>(cell.horizon);
      auto adv = std::make_unique<SwitchAdversary>(arms, switches, delta, setup);
      auto* raw = adv.get();
      phases = [raw] { return static_cast<std::int64_t>(raw->switches_completed()); };
      env = std::move(adv);
    } else if (cell.variant == "oblivious") {
      const int n = static_cast<int>(p.integer("oblivious_phases"));
      env = std::make_unique<ObliviousSwitchEnv>(arms, n, delta, cell.horizon, setup);
      phases = [n] { return static_cast<std::int64_t>(n - 1); };
    } else {
      throw ConfigError("field 'variants': unknown bob variant '" + cell.variant + "'");
    }
    BobAgent agent(BobProtocol(arms, cell.horizon, epoch));
    Rng env_rng(cell.seed, stream::environment);
    Rng agent_rng(cell.seed, stream::agent);
    const auto trace = simulate(*env, agent, cell.horizon, env_rng, agent_rng);
    return std::vector<Outcome>{{"bob",
                                 {pseudo_regret(trace, constant_arms(arms), env->oracle()),
                                  per_context_best_regret(trace, arms, env->oracle())},
                                 0,
                                 phases()}};
  };
  return s;
}

std::vector<int> env_indices(const Params& p, int k) {
  auto idx = p.list<int>("env_indices");
  if (idx.empty()) {
    idx.resize(static_cast<std::size_t>(k + 1));
    std::iota(idx.begin(), idx.end(), 0);
  }
  for (int i : idx) {
    if (i < 0 || i > k) throw ConfigError("field 'env_indices': index " + std::to_string(i) + " outside {0..k}");
  }
  return idx;
}

std::vector<std::string> lb_variants(const Params& p) {
  std::vector<std::string> out;
  for (int i : env_indices(p, static_cast<int>(p.integer("k")))) out.push_back("E" + std::to_string(i));
  return out;
}

// Pi_1 = {pi_0}, Pi_2 = {pi_0, pi_1, ..., pi_k}.
std::pair<PolicyClass, PolicyClass> lb_classes(int k) {
  std::vector<Policy> all{ConstantArm{Arm{2}}};
  for (int i = 0; i < k; ++i) all.emplace_back(CoordinateProjection{static_cast<std::size_t>(i)});
  return {PolicyClass("Pi1", {all.front()}), PolicyClass("Pi2", all)};
}

Scenario lowerbound_tradeoff() {
  Scenario s;
  s.info = {"lowerbound-tradeoff", "Reveal-budget agents on the lower-bound family E_0..E_k",
            json{{"k", 64}, {"delta", 0.2}, {"env_indices", json::array()}},
            json{{"budget", 0}, {"alpha", 1e-3}}};
  s.variants = lb_variants;
  s.run = [](const Cell& cell) {
    const auto& p = cell.params;
    const int k = static_cast<int>(p.integer("k"));
    const int index = std::stoi(cell.variant.substr(1));
    LowerBoundEnv env(k, p.real("delta"), index);
    auto agent = reveal_budget_agent(k, p.integer("budget"), p.real("alpha"));
    Rng env_rng(cell.seed, stream::environment);
    Rng agent_rng(cell.seed, stream::agent);
    const auto trace = simulate(env, *agent, cell.horizon, env_rng, agent_rng);
    const auto [pi1, pi2] = lb_classes(k);
    return std::vector<Outcome>{{agent->name(),
                                 {pseudo_regret(trace, pi1, env.oracle()), pseudo_regret(trace, pi2, env.oracle())},
                                 agent->reveals(),
                                 0}};
  };
  return s;
}

Scenario fullinfo_demo() {
  Scenario s;
  s.info = {"fullinfo-wrapper-demo", "Full-information second-order Hedge wrapped into a proper bandit agent",
            json{{"k", 16}, {"delta", 0.25}, {"env_indices", {0, 1}}},
            json{{"alpha", 0.0}, {"exploration", "proper"}, {"gamma", 0.0}}};
  s.variants = lb_variants;
  s.run = [](const Cell& cell) {
    const auto& p = cell.params;
    const int k = static_cast<int>(p.integer("k"));
    const int index = std::stoi(cell.variant.substr(1));
    WrapperConfig wc;
    wc.horizon = cell.horizon;
    wc.alpha = p.real("alpha");
    wc.k = k;
    wc.gamma_override = p.real("gamma");
    const auto mode = p.text("exploration");
    if (mode == "proper") {
      wc.exploration = Exploration::proper;
    } else if (mode == "uniform") {
      wc.exploration = Exploration::uniform;
    } else {
      throw ConfigError("field 'exploration': expected 'proper' or 'uniform'");
    }
    try {
      wc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    LowerBoundEnv env(k, p.real("delta"), index);
    WrapperAgent agent(wc);
    Rng env_rng(cell.seed, stream::environment);
    Rng agent_rng(cell.seed, stream::agent);
    const auto trace = simulate(env, agent, cell.horizon, env_rng, agent_rng);
    const auto [pi1, pi2] = lb_classes(k);
    return std::vector<Outcome>{{agent.name(),
                                 {pseudo_regret(trace, pi1, env.oracle()), pseudo_regret(trace, pi2, env.oracle())},
                                 agent.reveals(),
                                 0}};
  };
  return s;
}

Scenario tv_scenario() {
  Scenario s;
  s.info = {"tv-check", "Exact and Monte Carlo TV / likelihood-ratio checks; writes the tv-check CSV schema",
            json{{"k", 2}, {"n", 2}, {"delta", 0.25}, {"mc_trials", 10000}}, json::object()};
  s.variants = [](const Params&) { return std::vector<std::string>{"tv"}; };
  s.run = nullptr;  // handled separately: different output schema
  return s;
}

const std::vector<Scenario>& registry() {
  static const std::vector<Scenario> all{corral_pareto(),   exp4_standalone(), sswitch_tradeoff(), lowerbound_tradeoff(),
                                         bob_demo(),        fullinfo_demo(),   tv_scenario()};
  return all;
}

const Scenario& find_scenario(const std::string& id) {
  for (const auto& s : registry()) {
    if (s.info.id == id) return s;
  }
  std::string known;
  for (const auto& s : registry()) known += (known.empty() ? "" : ", ") + s.info.id;
  throw ConfigError("field 'scenario': unknown scenario '" + id + "' (known: " + known + ")");
}

// ---- config parsing --------------------------------------------------------

std::string location(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

bool same_kind(const json& def, const json& v) {
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number_float()) return v.is_number();
  return def.type() == v.type();
}

// Checks `given` against `defaults` key by key and returns the merged object.
json merge_section(const json& defaults, const json& given, const std::string& section) {
  json out = defaults;
  if (given.is_null()) return out;
  if (!given.is_object()) throw ConfigError("field '" + section + "': expected an object");
  for (const auto& [key, value] : given.items()) {
    if (!defaults.contains(key)) throw ConfigError("field '" + section + "." + key + "': unknown parameter");
    if (!same_kind(defaults.at(key), value)) {
      throw ConfigError("field '" + section + "." + key + "': expected " + std::string(defaults.at(key).type_name()) +
                        ", got " + std::string(value.type_name()));
    }
    out[key] = value;
  }
  return out;
}

std::string sweep_value_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return format_double(v.get<double>());
  return v.dump();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": malformed JSON at " + location(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(source + ": top level must be an object");
  static const std::set<std::string> known{"scenario", "T",   "replications", "seed", "sweep", "environment",
                                           "agent",    "output", "record_wall_time", "threads"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw ConfigError(source + ": field '" + key + "': unknown field");
  }
  ExperimentConfig c;
  try {
    if (!doc.contains("scenario") || !doc["scenario"].is_string()) throw ConfigError("field 'scenario': required string");
    c.scenario = doc["scenario"].get<std::string>();
    const Scenario& sc = find_scenario(c.scenario);

    if (c.scenario != "tv-check") {
      if (!doc.contains("T") || !doc["T"].is_number_integer() || doc["T"].get<std::int64_t>() < 1) {
        throw ConfigError("field 'T': required integer >= 1");
      }
      c.horizon = doc["T"].get<std::int64_t>();
    }
    if (doc.contains("replications")) {
      if (!doc["replications"].is_number_integer() || doc["replications"].get<std::int64_t>() < 1) {
        throw ConfigError("field 'replications': must be an integer >= 1");
      }
      c.replications = doc["replications"].get<int>();
    }
    if (doc.contains("seed")) {
      if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<std::int64_t>() >= 0)) {
        throw ConfigError("field 'seed': must be a non-negative integer");
      }
      c.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("threads")) {
      if (!doc["threads"].is_number_integer() || doc["threads"].get<int>() < 1) throw ConfigError("field 'threads': must be >= 1");
      c.threads = doc["threads"].get<int>();
    }
    if (doc.contains("record_wall_time")) {
      if (!doc["record_wall_time"].is_boolean()) throw ConfigError("field 'record_wall_time': must be a boolean");
      c.record_wall_time = doc["record_wall_time"].get<bool>();
    }
    if (doc.contains("output")) {
      if (!doc["output"].is_string()) throw ConfigError("field 'output': must be a string");
      c.output = doc["output"].get<std::string>();
    }
    c.environment = merge_section(sc.info.environment_defaults, doc.value("environment", json()), "environment");
    c.agent = merge_section(sc.info.agent_defaults, doc.value("agent", json()), "agent");

    if (doc.contains("sweep")) {
      const auto& sw = doc["sweep"];
      if (!sw.is_object() || !sw.contains("param") || !sw["param"].is_string() || !sw.contains("values") ||
          !sw["values"].is_array() || sw["values"].empty()) {
        throw ConfigError("field 'sweep': expected {\"param\": <name>, \"values\": [non-empty list]}");
      }
      c.sweep.param = sw["param"].get<std::string>();
      const bool in_env = c.environment.contains(c.sweep.param);
      const bool in_agent = c.agent.contains(c.sweep.param);
      if (!in_env && !in_agent) throw ConfigError("field 'sweep.param': '" + c.sweep.param + "' is not a parameter of " + c.scenario);
      const json& def = in_env ? sc.info.environment_defaults.at(c.sweep.param) : sc.info.agent_defaults.at(c.sweep.param);
      std::set<std::string> seen;
      for (const auto& v : sw["values"]) {
        if (!same_kind(def, v)) throw ConfigError("field 'sweep.values': value " + v.dump() + " has the wrong type");
        if (!seen.insert(v.dump()).second) throw ConfigError("field 'sweep.values': duplicate value " + v.dump());
        c.sweep.values.push_back(v);
      }
    }
    for (const auto& key : c.environment.items()) {
      if (c.agent.contains(key.key())) throw ConfigError("parameter '" + key.key() + "' is ambiguous");
    }
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::vector<ScenarioInfo> list_scenarios() {
  std::vector<ScenarioInfo> out;
  for (const auto& s : registry()) out.push_back(s.info);
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::vector<ResultRow> run_scenario_rows(const ExperimentConfig& config) {
  const Scenario& sc = find_scenario(config.scenario);
  if (!sc.run) throw ConfigError("scenario '" + sc.info.id + "' writes its own schema; use run_scenario");
  const std::uint64_t root = config.seed.value_or(0);

  struct Job {
    json env, agent;
    std::string sweep_value;
    std::string variant;
    std::size_t grid, variant_index, rep;
  };
  std::vector<Job> jobs;
  const std::size_t grid_size = config.sweep.param.empty() ? 1 : config.sweep.values.size();
  for (std::size_t g = 0; g < grid_size; ++g) {
    json env = config.environment;
    json agent = config.agent;
    std::string value;
    if (!config.sweep.param.empty()) {
      const auto& v = config.sweep.values[g];
      (env.contains(config.sweep.param) ? env : agent)[config.sweep.param] = v;
      value = sweep_value_text(v);
    }
    const auto variants = sc.variants(Params{env, agent});
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
      for (int r = 0; r < config.replications; ++r) jobs.push_back({env, agent, value, variants[vi], g, vi, static_cast<std::size_t>(r)});
    }
  }

  std::vector<std::vector<ResultRow>> results(jobs.size());
  auto work = [&](std::size_t j) {
    const Job& job = jobs[j];
    // the seed depends on (variant, replication) only, so sweep values share
    // common random numbers
    const std::uint64_t seed = derive_seed(root, 1 + job.variant_index, job.rep);
    const auto t0 = std::chrono::steady_clock::now();
    const auto outs = sc.run(Cell{Params{job.env, job.agent}, config.horizon, seed, job.variant});
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    for (std::size_t a = 0; a < outs.size(); ++a) {
      ResultRow row;
      row.scenario = sc.info.id;
      row.seed = seed;
      row.sweep_param = config.sweep.param;
      row.sweep_value = job.sweep_value;
      row.agent = outs[a].agent;
      row.env = job.variant;
      row.horizon = config.horizon;
      row.regrets = outs[a].regrets;
      row.reveals = outs[a].reveals;
      row.phases = outs[a].phases;
      row.wall_ms = config.record_wall_time ? ms : 0.0;
      row.grid = job.grid;
      row.variant = job.variant_index;
      row.replication = job.rep;
      row.agent_slot = a;
      results[j].push_back(std::move(row));
    }
  };

  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(config.threads), jobs.size());
  if (threads <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) work(j);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t j = w; j < jobs.size(); j += threads) work(j);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<ResultRow> rows;
  for (auto& r : results) {
    for (auto& row : r) rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.grid, a.variant, a.replication, a.agent_slot) < std::tie(b.grid, b.variant, b.replication, b.agent_slot);
  });
  return rows;
}

std::string csv_header(std::size_t num_classes) {
  std::string h = "scenario,seed,sweep_param,sweep_value,agent,env,T";
  for (std::size_t m = 1; m <= num_classes; ++m) h += ",regret_pi" + std::to_string(m);
  return h + ",reveals,phases,wall_ms\n";
}

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::size_t classes = 0;
  for (const auto& r : rows) classes = std::max(classes, r.regrets.size());
  std::string out = csv_header(classes);
  for (const auto& r : rows) {
    out += csv_field(r.scenario) + ',' + std::to_string(r.seed) + ',' + csv_field(r.sweep_param) + ',' +
           csv_field(r.sweep_value) + ',' + csv_field(r.agent) + ',' + csv_field(r.env) + ',' + std::to_string(r.horizon);
    for (std::size_t m = 0; m < classes; ++m) out += ',' + (m < r.regrets.size() ? format_double(r.regrets[m]) : std::string());
    out += ',' + std::to_string(r.reveals) + ',' + std::to_string(r.phases) + ',' + format_double(r.wall_ms) + '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TvRow tv_check(int k, int n, double delta, std::int64_t mc_trials, std::uint64_t seed) {
  LrEventSpec spec{k, n, delta};
  spec.validate();
  TvRow row{k, n, delta, std::nullopt, 0.0, 0.0, std::nullopt};
  try {
    row.exact_tv = exact_tv(spec);
    row.lr_gap = lr_event_gap_exact(spec);
  } catch (const EnumerationBudgetError&) {
    Rng rng(seed, stream::environment);
    const auto mc = lr_event_gap_mc(spec, mc_trials, rng);
    row.lr_gap = mc.estimate;
    row.lr_gap_se = mc.standard_error;
  }
  if (k >= 2) row.analytic_bound = analytic_bound(spec);
  return row;
}

std::string format_tv_csv(const std::vector<TvRow>& rows) {
  std::string out = "k,N,Delta,exact_tv,lr_gap,analytic_bound,lr_gap_se\n";
  for (const auto& r : rows) {
    out += std::to_string(r.k) + ',' + std::to_string(r.n) + ',' + format_double(r.delta) + ',' +
           (r.exact_tv ? format_double(*r.exact_tv) : std::string()) + ',' + format_double(r.lr_gap) + ',' +
           (r.analytic_bound ? format_double(*r.analytic_bound) : std::string()) + ',' + format_double(r.lr_gap_se) + '\n';
  }
  return out;
}

std::size_t run_scenario(const ExperimentConfig& config, const std::filesystem::path& out) {
  const std::filesystem::path target = out.empty() ? std::filesystem::path(config.output) : out;
  if (target.empty()) throw ConfigError("no output path: set 'output' or pass --out");
  if (config.scenario == "tv-check") {
    std::vector<TvRow> rows;
    const std::size_t grid = config.sweep.param.empty() ? 1 : config.sweep.values.size();
    for (std::size_t g = 0; g < grid; ++g) {
      json env = config.environment;
      if (!config.sweep.param.empty()) env[config.sweep.param] = config.sweep.values[g];
      rows.push_back(tv_check(env.at("k").get<int>(), env.at("n").get<int>(), env.at("delta").get<double>(),
                              env.at("mc_trials").get<std::int64_t>(), derive_seed(config.seed.value_or(0), g)));
    }
    write_file_atomic(target, format_tv_csv(rows));
    return rows.size();
  }
  const auto rows = run_scenario_rows(config);
  write_file_atomic(target, format_csv(rows));
  return rows.size();
}

}  // namespace mslab
