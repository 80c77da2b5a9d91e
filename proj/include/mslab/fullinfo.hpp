#pragma once

#include <cstdint>
#include <vector>

#include "mslab/core.hpp"
#include "mslab/environments.hpp"
#include "mslab/learners.hpp"
#include "mslab/rng.hpp"
#include "mslab/simulation.hpp"

namespace mslab {

enum class Exploration {
  proper,   // follow pi_0 w.p. gamma/3 and pi_1 w.p. 2gamma/3; drawn before the context
  uniform,  // play each of the 3 arms w.p. gamma/3 (needs the context; not proper)
};

struct WrapperConfig {
  std::int64_t horizon = 1;
  double alpha = 0.0;
  int k = 2;  // projection policies pi_1..pi_k; the augmented class also holds k copies of pi_0
  Exploration exploration = Exploration::proper;
  double gamma_override = 0.0;  // > 0 replaces 3 T^{-1/2 + alpha/2}

  double gamma() const;
  void validate() const;
  std::size_t num_experts() const { return 2 * static_cast<std::size_t>(k); }
};

// Experts 0..k-1 are the copies of pi_0 (arm 3), expert k + i - 1 is pi_i.
PolicyClass augmented_class(int k);

struct PolicyDraw {
  enum class Kind { expert, explore_pi0, explore_pi1, explore_uniform };
  Kind kind = Kind::expert;
  std::size_t expert = 0;  // valid for Kind::expert
};

class FullInfoWrapper {
 public:
  explicit FullInfoWrapper(WrapperConfig config);

  const WrapperConfig& config() const { return config_; }
  double gamma() const { return gamma_; }
  const SecondOrderHedge& expert_algorithm() const { return hedge_; }
  SecondOrderHedge& expert_algorithm() { return hedge_; }

  // Step 1: uses only the expert state and the rng.
  PolicyDraw choose_policy(Rng& rng) const;
  PolicyDraw choose_policy(const SimplexWeights& p, Rng& rng) const;
  // Step 2: the arm the drawn policy plays at this context.
  Arm resolve(const PolicyDraw& draw, const BitVector& context, Rng& rng) const;

  // gamma/3 * l_hat for every augmented expert, all in [0, 1].
  std::vector<double> fed_losses(const SimplexWeights& p, const BitVector& context, Arm arm, double loss) const;
  // Builds the fed vector from the current expert distribution and feeds it.
  // Returns the fed vector.
  std::vector<double> update(const BitVector& context, Arm arm, double loss);

 private:
  WrapperConfig config_;
  double gamma_;
  PolicyClass experts_;
  SecondOrderHedge hedge_;
};

class WrapperAgent : public Agent {
 public:
  explicit WrapperAgent(WrapperConfig config);
  Arm act(const Context& context, Rng& rng) override;
  void observe(const Context& context, Arm arm, const Feedback& feedback) override;
  std::string name() const override { return "fullinfo-wrapper"; }
  std::int64_t reveals() const override { return reveals_; }
  const FullInfoWrapper& wrapper() const { return wrapper_; }
  // Largest fed loss component seen so far.
  double max_fed_loss() const { return max_fed_; }
  double min_fed_loss() const { return min_fed_; }

 private:
  FullInfoWrapper wrapper_;
  std::int64_t reveals_ = 0;
  double max_fed_ = 0.0;
  double min_fed_ = 0.0;
};

struct VarianceProbe {
  double estimate = 0.0;
  double standard_error = 0.0;
};

// Monte Carlo estimate of E[Var_{pi ~ p}[gamma l_hat_pi / 3]] for the given
// expert distribution, with contexts and losses drawn from `env`.
VarianceProbe wrapper_variance_probe(const FullInfoWrapper& wrapper, const SimplexWeights& expert_distribution,
                                     LowerBoundEnv& env, std::int64_t trials, Rng& rng);

}  // namespace mslab
