#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mslab {

// Arms are 0-based: with K arms the last one ("arm K") is Arm{K - 1}.
struct Arm {
  int index = 0;
  auto operator<=>(const Arm&) const = default;
};

// ---- contexts ------------------------------------------------------------

struct PhaseCounter {
  int phase = 1;  // 1-based, saturates at S + 1
  auto operator<=>(const PhaseCounter&) const = default;
};

// Each bit is 1 or 2. Coordinate i of the vector is x_{i+1}.
struct BitVector {
  std::vector<std::uint8_t> bits;
  auto operator<=>(const BitVector&) const = default;
};

struct TimeIndex {
  std::int64_t t = 0;
  auto operator<=>(const TimeIndex&) const = default;
};

// Finite-support context drawn by the generic stochastic environment.
struct Categorical {
  int id = 0;
  auto operator<=>(const Categorical&) const = default;
};

using Context = std::variant<PhaseCounter, BitVector, TimeIndex, Categorical>;

// ---- policies ------------------------------------------------------------

struct ConstantArm {
  Arm arm;
  bool operator==(const ConstantArm&) const = default;
};

// pi_i(x) = x_i. `coordinate` is 0-based; bit value b maps to Arm{b - 1}.
struct CoordinateProjection {
  std::size_t coordinate = 0;
  bool operator==(const CoordinateProjection&) const = default;
};

struct TablePolicy {
  std::map<Context, Arm> table;
  bool operator==(const TablePolicy&) const = default;
};

using Policy = std::variant<ConstantArm, CoordinateProjection, TablePolicy>;

class PolicyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Arm evaluate_policy(const Policy& policy, const Context& context);

std::string describe(const Context& context);

class PolicyClass {
 public:
  // complexity <= 0 means "use max(1, ln |policies|)".
  PolicyClass(std::string name, std::vector<Policy> policies, double complexity = 0.0);

  const std::string& name() const { return name_; }
  std::size_t size() const { return policies_.size(); }
  const Policy& operator[](std::size_t i) const { return policies_[i]; }
  const std::vector<Policy>& policies() const { return policies_; }
  // The class's complexity value C_m (ln|Pi| by default, floored at 1 so a
  // singleton class still gets a positive budget).
  double complexity() const { return complexity_; }
  void set_complexity(double c);

  // True when this class's policy list is a prefix of `larger`'s.
  bool is_prefix_of(const PolicyClass& larger) const;

 private:
  std::string name_;
  std::vector<Policy> policies_;
  double complexity_;
};

double default_complexity(std::size_t class_size);

// ---- distributions -------------------------------------------------------

class SimplexWeights {
 public:
  static constexpr double kTolerance = 1e-9;

  SimplexWeights() = default;
  // Validates non-negativity and |sum - 1| <= kTolerance.
  explicit SimplexWeights(std::vector<double> weights);

  static SimplexWeights uniform(std::size_t n);
  static SimplexWeights point_mass(std::size_t n, std::size_t at);
  // Divides by the sum. Entries must be non-negative with positive sum.
  static SimplexWeights normalize(std::vector<double> unnormalized);
  // Softmax of log-weights, computed with the max shifted out.
  static SimplexWeights from_log_weights(std::span<const double> log_weights);

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> values() const { return w_; }
  double min() const;

 private:
  std::vector<double> w_;
};

// ---- traces and regret ---------------------------------------------------

struct Feedback {
  double loss = 0.0;
  bool revealed = false;            // full information available this round
  std::vector<std::uint8_t> z;      // revealed per-policy losses (lower-bound env)
};

struct StepRecord {
  std::int64_t t = 0;  // 1-based round
  Arm arm;
  double loss = 0.0;
  Context context;
  int base = -1;  // selected base under a corraller, -1 otherwise
  bool operator==(const StepRecord&) const = default;
};

class RegretTrace {
 public:
  void record(StepRecord step) { steps_.push_back(std::move(step)); }
  std::span<const StepRecord> steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  void reserve(std::size_t n) { steps_.reserve(n); }
  bool operator==(const RegretTrace&) const = default;

 private:
  std::vector<StepRecord> steps_;
};

class OracleError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Expected loss of an arm at a context.
using MeanOracle = std::function<double(const Context&, Arm)>;

// Explicit per-(context, arm) table; lookups of unknown contexts throw.
class MeanTable {
 public:
  void set(const Context& context, std::vector<double> means) { table_[context] = std::move(means); }
  double operator()(const Context& context, Arm arm) const;

 private:
  std::map<Context, std::vector<double>> table_;
};

// Running partial sums of mu(x_t, pi(x_t)). Length equals trace length.
std::vector<double> policy_ledger(const RegretTrace& trace, const Policy& policy, const MeanOracle& mean);
std::vector<double> agent_ledger(const RegretTrace& trace, const MeanOracle& mean);

// max over pi of sum_t mu(x_t, A_t) - mu(x_t, pi(x_t)).
double pseudo_regret(const RegretTrace& trace, const PolicyClass& policy_class, const MeanOracle& mean);

// Regret against the best arm of every visited context separately, i.e. the
// unrestricted table class. Against PhaseCounter contexts this is dynamic
// regret versus the per-phase optimum.
double per_context_best_regret(const RegretTrace& trace, int num_arms, const MeanOracle& mean);

}  // namespace mslab
