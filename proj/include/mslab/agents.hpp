#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "mslab/learners.hpp"
#include "mslab/simulation.hpp"

namespace mslab {

class FixedArmAgent : public Agent {
 public:
  explicit FixedArmAgent(Arm arm) : arm_(arm) {}
  Arm act(const Context&, Rng&) override { return arm_; }
  void observe(const Context&, Arm, const Feedback&) override {}
  std::string name() const override { return "fixed-arm-" + std::to_string(arm_.index + 1); }

 private:
  Arm arm_;
};

// Context-free EXP3 on the realized losses.
class Exp3Agent : public Agent {
 public:
  Exp3Agent(Exp3 learner, std::string name) : learner_(std::move(learner)), name_(std::move(name)) {}
  Arm act(const Context&, Rng& rng) override { return learner_.sample(rng); }
  void observe(const Context&, Arm arm, const Feedback& f) override { learner_.update(arm, f.loss); }
  std::string name() const override { return name_; }
  const Exp3& learner() const { return learner_; }

 private:
  Exp3 learner_;
  std::string name_;
};

class BobAgent : public Agent {
 public:
  explicit BobAgent(BobProtocol protocol) : protocol_(std::move(protocol)) {}
  Arm act(const Context&, Rng& rng) override { return protocol_.act(rng); }
  void observe(const Context&, Arm arm, const Feedback& f) override { protocol_.observe(arm, f.loss); }
  std::string name() const override { return "bob"; }
  const BobProtocol& protocol() const { return protocol_; }

 private:
  BobProtocol protocol_;
};

// Explore-then-commit agent for the lower-bound family. For the first n
// rounds it plays a revealing arm (1 or 2, uniformly) and accumulates the
// revealed per-policy loss counts. Then it commits to the projection with
// the fewest losses if that count is at most the one-sided binomial
// threshold at family-wise level `alpha` (Bonferroni over the k
// projections), otherwise to pi_0, i.e. arm 3.
class RevealBudgetAgent : public Agent {
 public:
  RevealBudgetAgent(int k, std::int64_t budget, double alpha = 1e-3);

  Arm act(const Context& context, Rng& rng) override;
  void observe(const Context& context, Arm arm, const Feedback& feedback) override;
  std::string name() const override { return "reveal-budget-" + std::to_string(budget_); }
  std::int64_t reveals() const override { return reveals_; }

  // -1 while exploring or when committed to pi_0; otherwise the 0-based
  // coordinate of the chosen projection.
  int committed_projection() const { return committed_; }
  bool committed() const { return decided_; }
  std::int64_t threshold() const { return threshold_; }

 private:
  void decide();

  int k_;
  std::int64_t budget_;
  std::int64_t threshold_;
  std::int64_t reveals_ = 0;
  std::vector<std::int64_t> loss_counts_;
  bool decided_ = false;
  int committed_ = -1;
};

// Largest t with P(Bin(n, 1/2) <= t) <= level, or -1 if even t = 0 fails.
std::int64_t binomial_lower_threshold(std::int64_t n, double level);

std::unique_ptr<Agent> reveal_budget_agent(int k, std::int64_t budget, double alpha = 1e-3);

}  // namespace mslab
