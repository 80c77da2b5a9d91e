#include "mslab/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mslab {

std::int64_t binomial_lower_threshold(std::int64_t n, double level) {
  if (n < 0) throw std::invalid_argument("binomial_lower_threshold: n must be non-negative");
  double cdf = 0.0;
  std::int64_t t = -1;
  for (std::int64_t j = 0; j <= n; ++j) {
    const double log_p = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) - n * std::log(2.0);
    cdf += std::exp(log_p);
    if (cdf > level) break;
    t = j;
  }
  return t;
}

RevealBudgetAgent::RevealBudgetAgent(int k, std::int64_t budget, double alpha)
    : k_(k), budget_(budget), loss_counts_(static_cast<std::size_t>(k), 0) {
  if (k < 1) throw std::invalid_argument("RevealBudgetAgent: need k >= 1");
  if (budget < 0) throw std::invalid_argument("RevealBudgetAgent: budget must be non-negative");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("RevealBudgetAgent: alpha must lie in (0, 1)");
  threshold_ = binomial_lower_threshold(budget, alpha / k);
  if (budget == 0) decided_ = true;
}

Arm RevealBudgetAgent::act(const Context& context, Rng& rng) {
  if (!decided_) return Arm{static_cast<int>(rng.uniform_index(2))};
  if (committed_ < 0) return Arm{2};
  return evaluate_policy(CoordinateProjection{static_cast<std::size_t>(committed_)}, context);
}

void RevealBudgetAgent::observe(const Context&, Arm arm, const Feedback& feedback) {
  if (decided_ || arm.index == 2) return;
  if (!feedback.revealed || static_cast<int>(feedback.z.size()) != k_) {
    throw std::logic_error("RevealBudgetAgent: revealing arm returned no z vector");
  }
  for (int i = 0; i < k_; ++i) loss_counts_[static_cast<std::size_t>(i)] += feedback.z[static_cast<std::size_t>(i)];
  if (++reveals_ == budget_) decide();
}

void RevealBudgetAgent::decide() {
  decided_ = true;
  const auto it = std::min_element(loss_counts_.begin(), loss_counts_.end());
  if (*it <= threshold_) committed_ = static_cast<int>(it - loss_counts_.begin());
}

std::unique_ptr<Agent> reveal_budget_agent(int k, std::int64_t budget, double alpha) {
  return std::make_unique<RevealBudgetAgent>(k, budget, alpha);
}

}  // namespace mslab
