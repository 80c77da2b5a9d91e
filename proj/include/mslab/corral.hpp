#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "mslab/core.hpp"
#include "mslab/environments.hpp"
#include "mslab/learners.hpp"
#include "mslab/rng.hpp"
#include "mslab/simulation.hpp"

namespace mslab {

struct CorralTuning {
  std::vector<double> R;     // regret budgets
  std::vector<double> beta;  // thresholds in (0, 1]
  double eta = 1.0;
};

// R_m = sqrt(C_m T), beta_m = min{1, max{1, C^2 / C_m} / M}, eta = 1/sqrt(T).
CorralTuning tune_from_budgets(std::span<const double> complexities, double tradeoff, std::int64_t horizon);

class CorralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tsallis-1/2 FTRL over M bases with negative biases that keep
//   B_m = sqrt(rho_m) R_m,   rho_m = 1 / min{beta_m, min_{s<=t} q_{s,m}}
// for every m after every round.
class HedgedCorral {
 public:
  struct Selection {
    SimplexWeights q;
    std::size_t base = 0;
  };

  explicit HedgedCorral(CorralTuning tuning);

  std::size_t size() const { return L_.size(); }
  const SimplexWeights& q() const { return q_; }
  Selection select(Rng& rng) const;
  // Importance weight applied to the selected base's loss.
  double fed_loss(std::size_t base, double loss) const { return loss / q_[base]; }
  // L <- L + e_base * loss / q_base, then restores the hedge constraint.
  void update(std::size_t base, double loss);
  // Bias fixed point starting from a tentative q. Public for tests; update()
  // calls it with the FTRL solution for the new L - B.
  void enforce_bias_constraint(const SimplexWeights& tentative);

  std::span<const double> L() const { return L_; }
  std::span<const double> B() const { return B_; }
  std::span<const double> rho() const { return rho_; }
  std::span<const double> running_min_q() const { return running_min_; }
  std::span<const double> beta() const { return tuning_.beta; }
  std::span<const double> R() const { return tuning_.R; }
  double eta() const { return tuning_.eta; }
  std::int64_t t() const { return t_; }

  // b applied in the last call to enforce_bias_constraint (summed over passes).
  std::span<const double> last_bias() const { return last_bias_; }
  int last_passes() const { return last_passes_; }
  // Sum over rounds of <q_{t+1}, b_t>.
  double bias_cost() const { return bias_cost_; }
  // max_m |B_m - sqrt(rho_m) R_m|.
  double hedge_residual() const;
  // max_m |rho_m - 1 / min{beta_m, running_min_q_m}|.
  double rho_residual() const;

 private:
  std::vector<double> shifted() const;

  CorralTuning tuning_;
  std::vector<double> L_;
  std::vector<double> B_;
  std::vector<double> rho_;
  std::vector<double> running_min_;
  SimplexWeights q_;
  std::vector<double> last_bias_;
  int last_passes_ = 0;
  double bias_cost_ = 0.0;
  std::int64_t t_ = 0;
};

// Corral over bandit bases as an Agent. The top draws from its own corral
// stream and base m from stream base + m, all derived from `root_seed`; the
// rng passed to act() is not used.
class CorralAgent : public Agent {
 public:
  CorralAgent(std::vector<std::unique_ptr<BaseLearner>> bases, CorralTuning tuning, std::uint64_t root_seed);

  Arm act(const Context& context, Rng& rng) override;
  void observe(const Context& context, Arm arm, const Feedback& feedback) override;
  std::string name() const override { return "hedged-corral"; }
  int last_base() const override { return static_cast<int>(selected_); }

  const HedgedCorral& corral() const { return corral_; }
  BaseLearner& base(std::size_t m) { return *bases_[m]; }

 private:
  std::vector<std::unique_ptr<BaseLearner>> bases_;
  HedgedCorral corral_;
  Rng top_rng_;
  std::vector<Rng> base_rngs_;
  std::size_t selected_ = 0;
};

// A single base driven directly with fed_loss = loss, using the same
// stream the corraller would give base 0.
class BaseAgent : public Agent {
 public:
  BaseAgent(std::unique_ptr<BaseLearner> base, std::uint64_t root_seed);
  Arm act(const Context& context, Rng& rng) override;
  void observe(const Context& context, Arm arm, const Feedback& feedback) override;
  std::string name() const override { return base_->name(); }

 private:
  std::unique_ptr<BaseLearner> base_;
  Rng rng_;
};

// Full Algorithm loop. The environment draws from the environment stream of
// `root_seed`. `on_round`, if set, sees the corraller after every round.
RegretTrace run_corral(std::vector<std::unique_ptr<BaseLearner>> bases, Environment& env, std::int64_t horizon,
                       const CorralTuning& tuning, std::uint64_t root_seed,
                       const std::function<void(const HedgedCorral&)>& on_round = {});

}  // namespace mslab
