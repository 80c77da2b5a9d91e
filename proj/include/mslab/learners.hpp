#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mslab/core.hpp"
#include "mslab/rng.hpp"

namespace mslab {

// A contextual bandit learner that accepts externally supplied (possibly
// importance-weighted) losses. This is the interface the corraller drives.
class BaseLearner {
 public:
  virtual ~BaseLearner() = default;
  virtual int num_arms() const = 0;
  virtual SimplexWeights arm_distribution(const Context& context) = 0;
  virtual void update(const Context& context, Arm arm, double fed_loss) = 0;
  virtual std::string name() const = 0;

  Arm propose(const Context& context, Rng& rng) {
    const auto p = arm_distribution(context);
    return Arm{static_cast<int>(rng.categorical(p.values()))};
  }
};

// EXP4 over a finite policy class.
//
// Default learning rate is anytime: eta_t = sqrt(ln|Pi| / (K (1 + V_t)))
// where V_t sums fed_loss^2 over updates so far, the current one included.
// Under importance weighting 1/q this grows like rho * t, which is what
// gives the sqrt(rho K T ln|Pi|) regret shape.
class Exp4 : public BaseLearner {
 public:
  struct Options {
    std::optional<double> fixed_learning_rate;
  };

  Exp4(PolicyClass policies, int num_arms);
  Exp4(PolicyClass policies, int num_arms, Options options);

  int num_arms() const override { return num_arms_; }
  SimplexWeights arm_distribution(const Context& context) override;
  void update(const Context& context, Arm arm, double fed_loss) override;
  std::string name() const override { return "exp4[" + policies_.name() + "]"; }

  const PolicyClass& policies() const { return policies_; }
  SimplexWeights policy_weights() const;
  std::span<const double> log_weights() const { return log_weights_; }
  double variance_proxy() const { return variance_proxy_; }
  // Rate that the next update would use if its fed loss were 0.
  double learning_rate() const;

 private:
  const std::vector<int>& arms_at(const Context& context);
  double rate_for(double variance_proxy) const;
  const std::vector<double>& weights();

  PolicyClass policies_;
  int num_arms_;
  Options options_;
  std::vector<double> log_weights_;
  std::vector<double> weights_;
  bool weights_dirty_ = true;
  double variance_proxy_ = 0.0;
  std::map<Context, std::vector<int>> memo_;
  std::vector<int> scratch_arms_;
};

// EXP3 with optional uniform exploration and optional prior log-weights.
// Plays p = (1 - mixing) softmax(log_weights) + mixing / K and updates the
// played arm with loss / p(arm).
class Exp3 {
 public:
  Exp3(int num_arms, double learning_rate, double mixing = 0.0, std::vector<double> initial_log_weights = {});

  int num_arms() const { return num_arms_; }
  SimplexWeights distribution() const;
  Arm sample(Rng& rng) const;
  void update(Arm arm, double loss);
  std::span<const double> log_weights() const { return log_weights_; }
  double learning_rate() const { return learning_rate_; }
  double mixing() const { return mixing_; }

 private:
  int num_arms_;
  double learning_rate_;
  double mixing_;
  std::vector<double> log_weights_;
};

// EXP3.S: exponential update on the importance-weighted loss, renormalize,
// then mix in the uniform distribution so every weight is >= mixing / K.
class Exp3S {
 public:
  Exp3S(int num_arms, double learning_rate, double mixing);

  int num_arms() const { return static_cast<int>(weights_.size()); }
  SimplexWeights distribution() const { return SimplexWeights(weights_); }
  Arm sample(Rng& rng) const;
  void update(Arm arm, double loss);
  std::vector<double> log_weights() const;
  double learning_rate() const { return learning_rate_; }
  double mixing() const { return mixing_; }

 private:
  std::vector<double> weights_;
  double learning_rate_;
  double mixing_;
};

// Hedge with the variance-adaptive rate
//   eta_t = min{1/2, sqrt(ln N / (1 + sum_{s<t} Var_{i~p_s}[l_{s,i}]))}.
class SecondOrderHedge {
 public:
  explicit SecondOrderHedge(std::size_t num_experts);

  std::size_t num_experts() const { return log_weights_.size(); }
  SimplexWeights distribution() const { return SimplexWeights::from_log_weights(log_weights_); }
  // Returns the pre-update distribution p_t and applies the update.
  SimplexWeights step(std::span<const double> losses);
  double second_order_term() const { return second_order_; }
  double learning_rate() const;
  std::span<const double> log_weights() const { return log_weights_; }

 private:
  std::vector<double> log_weights_;
  double second_order_ = 0.0;
};

// Learning-rate grid {2^-j : j = 0..ceil(log2 T)}.
std::vector<double> bob_learning_rate_grid(std::int64_t horizon);

// Bandit-over-bandit: the horizon is cut into epochs of length L. At each
// epoch start the top EXP3 picks a learning rate from the grid and a fresh
// EXP3.S runs the epoch with it. At epoch end the top is fed L_sum / L for
// the picked rate. The top's own EXP3 update importance-weights that value
// as usual; the base losses are never reweighted by the top's probability.
class BobProtocol {
 public:
  struct Options {
    std::optional<double> top_learning_rate;  // default sqrt(2 ln J / (J * epochs))
    std::optional<double> base_mixing;        // default 1 / T
    std::vector<double> grid;                 // default bob_learning_rate_grid(T)
  };

  BobProtocol(int num_arms, std::int64_t horizon, std::int64_t epoch_length);
  BobProtocol(int num_arms, std::int64_t horizon, std::int64_t epoch_length, Options options);

  Arm act(Rng& rng);
  void observe(Arm arm, double loss);

  const Exp3& top() const { return top_; }
  const std::vector<double>& grid() const { return grid_; }
  std::int64_t epoch_length() const { return epoch_length_; }
  int current_grid_arm() const { return grid_arm_; }
  std::int64_t epochs_completed() const { return epochs_completed_; }
  // Values fed to the top so far, one per finished epoch.
  const std::vector<double>& fed_history() const { return fed_history_; }

 private:
  int num_arms_;
  std::int64_t horizon_;
  std::int64_t epoch_length_;
  double base_mixing_;
  std::vector<double> grid_;
  Exp3 top_;
  std::optional<Exp3S> base_;
  int grid_arm_ = -1;
  std::int64_t step_in_epoch_ = 0;
  double epoch_loss_ = 0.0;
  std::int64_t epochs_completed_ = 0;
  std::vector<double> fed_history_;
};

}  // namespace mslab
