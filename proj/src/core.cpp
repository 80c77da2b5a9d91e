#include "mslab/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mslab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

const char* variant_name(const Context& c) {
  switch (c.index()) {
    case 0: return "PhaseCounter";
    case 1: return "BitVector";
    case 2: return "TimeIndex";
    default: return "Categorical";
  }
}

}  // namespace

Arm evaluate_policy(const Policy& policy, const Context& context) {
  return std::visit(
      overloaded{
          [](const ConstantArm& p) { return p.arm; },
          [&](const CoordinateProjection& p) {
            const auto* x = std::get_if<BitVector>(&context);
            if (!x) {
              throw PolicyError(std::string("CoordinateProjection needs a BitVector context, got ") +
                                variant_name(context));
            }
            if (p.coordinate >= x->bits.size()) {
              throw PolicyError("CoordinateProjection coordinate " + std::to_string(p.coordinate) +
                                " outside context of length " + std::to_string(x->bits.size()));
            }
            const int bit = x->bits[p.coordinate];
            if (bit != 1 && bit != 2) throw PolicyError("BitVector entries must be 1 or 2");
            return Arm{bit - 1};
          },
          [&](const TablePolicy& p) {
            auto it = p.table.find(context);
            if (it == p.table.end()) {
              throw PolicyError("table policy undefined at context " + describe(context));
            }
            return it->second;
          },
      },
      policy);
}

std::string describe(const Context& context) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const PhaseCounter& c) { os << "phase(" << c.phase << ")"; },
                 [&](const BitVector& c) {
                   os << "bits(";
                   for (std::size_t i = 0; i < c.bits.size(); ++i) os << (i ? "," : "") << int(c.bits[i]);
                   os << ")";
                 },
                 [&](const TimeIndex& c) { os << "t(" << c.t << ")"; },
                 [&](const Categorical& c) { os << "ctx(" << c.id << ")"; },
             },
             context);
  return os.str();
}

double default_complexity(std::size_t class_size) {
  return std::max(1.0, std::log(static_cast<double>(class_size)));
}

PolicyClass::PolicyClass(std::string name, std::vector<Policy> policies, double complexity)
    : name_(std::move(name)), policies_(std::move(policies)), complexity_(complexity) {
  if (policies_.empty()) throw std::invalid_argument("policy class '" + name_ + "' is empty");
  if (!(complexity_ > 0.0)) complexity_ = default_complexity(policies_.size());
}

void PolicyClass::set_complexity(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("complexity must be positive");
  complexity_ = c;
}

bool PolicyClass::is_prefix_of(const PolicyClass& larger) const {
  if (size() > larger.size()) return false;
  return std::equal(policies_.begin(), policies_.end(), larger.policies_.begin());
}

SimplexWeights::SimplexWeights(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) throw std::invalid_argument("SimplexWeights: empty");
  double sum = 0.0;
  for (double v : w_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("SimplexWeights: negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kTolerance) {
    throw std::invalid_argument("SimplexWeights: entries sum to " + std::to_string(sum));
  }
}

SimplexWeights SimplexWeights::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("SimplexWeights: empty");
  return SimplexWeights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

SimplexWeights SimplexWeights::point_mass(std::size_t n, std::size_t at) {
  std::vector<double> w(n, 0.0);
  w.at(at) = 1.0;
  return SimplexWeights(std::move(w));
}

SimplexWeights SimplexWeights::normalize(std::vector<double> w) {
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw std::invalid_argument("SimplexWeights::normalize: negative entry");
    sum += v;
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) throw std::invalid_argument("SimplexWeights::normalize: bad total mass");
  for (double& v : w) v /= sum;
  return SimplexWeights(std::move(w));
}

SimplexWeights SimplexWeights::from_log_weights(std::span<const double> lw) {
  if (lw.empty()) throw std::invalid_argument("SimplexWeights: empty");
  const double top = *std::max_element(lw.begin(), lw.end());
  if (!std::isfinite(top)) throw std::invalid_argument("SimplexWeights: non-finite log-weight");
  std::vector<double> w(lw.size());
  for (std::size_t i = 0; i < lw.size(); ++i) w[i] = std::exp(lw[i] - top);
  return normalize(std::move(w));
}

double SimplexWeights::min() const { return *std::min_element(w_.begin(), w_.end()); }

double MeanTable::operator()(const Context& context, Arm arm) const {
  auto it = table_.find(context);
  if (it == table_.end()) throw OracleError("no mean-loss entry for context " + describe(context));
  if (arm.index < 0 || static_cast<std::size_t>(arm.index) >= it->second.size()) {
    throw OracleError("no mean-loss entry for arm " + std::to_string(arm.index) + " at " + describe(context));
  }
  return it->second[static_cast<std::size_t>(arm.index)];
}

std::vector<double> policy_ledger(const RegretTrace& trace, const Policy& policy, const MeanOracle& mean) {
  std::vector<double> out;
  out.reserve(trace.size());
  double acc = 0.0;
  for (const auto& s : trace.steps()) {
    acc += mean(s.context, evaluate_policy(policy, s.context));
    out.push_back(acc);
  }
  return out;
}

std::vector<double> agent_ledger(const RegretTrace& trace, const MeanOracle& mean) {
  std::vector<double> out;
  out.reserve(trace.size());
  double acc = 0.0;
  for (const auto& s : trace.steps()) {
    acc += mean(s.context, s.arm);
    out.push_back(acc);
  }
  return out;
}

double pseudo_regret(const RegretTrace& trace, const PolicyClass& policy_class, const MeanOracle& mean) {
  double agent = 0.0;
  for (const auto& s : trace.steps()) agent += mean(s.context, s.arm);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pi : policy_class.policies()) {
    double total = 0.0;
    for (const auto& s : trace.steps()) total += mean(s.context, evaluate_policy(pi, s.context));
    best = std::min(best, total);
  }
  return agent - best;
}

double per_context_best_regret(const RegretTrace& trace, int num_arms, const MeanOracle& mean) {
  if (num_arms < 1) throw std::invalid_argument("per_context_best_regret: num_arms must be positive");
  double total = 0.0;
  for (const auto& s : trace.steps()) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_arms; ++a) best = std::min(best, mean(s.context, Arm{a}));
    total += mean(s.context, s.arm) - best;
  }
  return total;
}

}  // namespace mslab
