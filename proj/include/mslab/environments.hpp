#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mslab/core.hpp"
#include "mslab/rng.hpp"

namespace mslab {

// A bandit environment. Each round the driver calls next_context(), then
// play(arm) exactly once. mean_loss() is the oracle used for pseudo-regret.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int num_arms() const = 0;
  virtual Context next_context(Rng& rng) = 0;
  virtual Feedback play(Arm arm, Rng& rng) = 0;
  virtual double mean_loss(const Context& context, Arm arm) const = 0;
  virtual std::string name() const = 0;

  MeanOracle oracle() const {
    return [this](const Context& c, Arm a) { return mean_loss(c, a); };
  }
};

// i.i.d. categorical contexts with Bernoulli losses of fixed means.
class StochasticContextualEnv : public Environment {
 public:
  // means[c][a] in [0, 1]; context_probs over contexts (uniform if empty).
  StochasticContextualEnv(std::vector<std::vector<double>> means, std::vector<double> context_probs = {},
                          std::string name = "stochastic");

  int num_arms() const override { return num_arms_; }
  Context next_context(Rng& rng) override;
  Feedback play(Arm arm, Rng& rng) override;
  double mean_loss(const Context& context, Arm arm) const override;
  std::string name() const override { return name_; }
  std::size_t num_contexts() const { return means_.size(); }

 private:
  std::vector<std::vector<double>> means_;
  std::vector<double> context_probs_;
  int num_arms_;
  std::string name_;
  int current_ = -1;
};

// ---- S-switch adversary ----------------------------------------------------

// ceil((K - 1) / (192 Delta^2)).
std::int64_t sswitch_n_max(int num_arms, double delta);

// min{S sqrt(K - 1) / (3072 C sqrt(T)), 1 / (8 sqrt 3)}.
double sswitch_theorem_tuning(int switches, int num_arms, std::int64_t horizon, double complexity);

// Mean of `arm` in phase `phase` (1-based) given that phase's optimal arm.
double sswitch_mean(int num_arms, int switches, double delta, int phase, int optimal_arm, Arm arm);

// Adaptive adversary: the optimal arm of the current phase is re-drawn each
// time the agent has played arms in [K-1] (all but the last) N_max times, for
// up to S phases; in phase S+1 every loss is 0. Optimal arms are pre-sampled
// at construction from the setup stream. Context = current phase.
class SwitchAdversary : public Environment {
 public:
  SwitchAdversary(int num_arms, int switches, double delta, Rng& setup_rng);
  SwitchAdversary(int num_arms, int switches, double delta, std::vector<int> optimal_arms);

  int num_arms() const override { return num_arms_; }
  Context next_context(Rng&) override { return PhaseCounter{phase_}; }
  Feedback play(Arm arm, Rng& rng) override;
  double mean_loss(const Context& context, Arm arm) const override;
  std::string name() const override { return "sswitch"; }

  double current_mean(Arm arm) const;
  int phase() const { return phase_; }
  int switches_completed() const { return phase_ - 1; }
  int plays_in_phase() const { return static_cast<int>(plays_in_phase_); }
  std::int64_t n_max() const { return n_max_; }
  double delta() const { return delta_; }
  int switches() const { return switches_; }
  const std::vector<int>& optimal_arms() const { return optimal_arms_; }

 private:
  int num_arms_;
  int switches_;
  double delta_;
  std::int64_t n_max_;
  std::vector<int> optimal_arms_;  // 0-based, each in [0, K-2]
  int phase_ = 1;
  std::int64_t plays_in_phase_ = 0;
};

// Same loss structure as the adversary but with phase changes at fixed,
// pre-announced rounds: `phases` phases of equal length over the horizon,
// none of them all-zero. Context = current phase.
class ObliviousSwitchEnv : public Environment {
 public:
  ObliviousSwitchEnv(int num_arms, int phases, double delta, std::int64_t horizon, Rng& setup_rng);

  int num_arms() const override { return num_arms_; }
  Context next_context(Rng&) override;
  Feedback play(Arm arm, Rng& rng) override;
  double mean_loss(const Context& context, Arm arm) const override;
  std::string name() const override { return "oblivious-switch"; }
  int phase() const { return phase_; }

 private:
  int num_arms_;
  int phases_;
  double delta_;
  std::int64_t horizon_;
  std::vector<int> optimal_arms_;
  std::int64_t t_ = 0;
  int phase_ = 1;
};

// ---- lower-bound family E_0, ..., E_k --------------------------------------

struct ReconstructedRound {
  std::array<double, 3> losses{};  // arms 1, 2, 3 at indices 0, 1, 2
  BitVector context;
};

// Independent Bernoullis; coordinate env_index (1-based) has mean (1-Delta)/2,
// the rest 1/2. env_index 0 gives all means 1/2.
std::vector<std::uint8_t> sample_z(int k, double delta, int env_index, Rng& rng);

// The bijection: l_a = z_1 if a = x_1 else 1 - z_1 for a in {1, 2};
// x_i = x_1 if z_i = z_1 else 3 - x_1; arm 3 loses 1/2 - Delta/4.
ReconstructedRound reconstruct_losses(const std::vector<std::uint8_t>& z, int x_first, double delta);

// Inverse direction: z_i = l_{x_i}.
std::vector<std::uint8_t> forward_z(const std::array<double, 3>& losses, const BitVector& context);

class LowerBoundEnv : public Environment {
 public:
  LowerBoundEnv(int k, double delta, int env_index);

  int num_arms() const override { return 3; }
  Context next_context(Rng& rng) override;
  // Arms 0, 1 are revealing: the loss plus the whole z vector is returned.
  Feedback play(Arm arm, Rng& rng) override;
  double mean_loss(const Context& context, Arm arm) const override;
  std::string name() const override { return "E" + std::to_string(env_index_); }

  int k() const { return k_; }
  double delta() const { return delta_; }
  int env_index() const { return env_index_; }
  const std::vector<std::uint8_t>& current_z() const { return z_; }
  const ReconstructedRound& current_round() const { return round_; }

 private:
  int k_;
  double delta_;
  int env_index_;
  std::vector<std::uint8_t> z_;
  ReconstructedRound round_;
};

struct LowerBoundTuning {
  double delta;
  std::int64_t n;
};

inline constexpr double kLowerBoundC1 = 1.0 / 160.0;
inline constexpr double kLowerBoundC2 = 0.1 * 160.0 * 160.0;

// Delta = min{c1 ln k / (C sqrt T), 1/4}, N = floor(ln k / (20 Delta^2)).
// Requires c2 C^2 <= ln k <= T / 2. Takes ln k directly since the window
// forces astronomically large k.
LowerBoundTuning lb_theorem_tuning(double log_k, double complexity, std::int64_t horizon);

}  // namespace mslab
