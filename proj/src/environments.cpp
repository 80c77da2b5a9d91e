#include "mslab/environments.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mslab {

// ---- stochastic contextual -------------------------------------------------

StochasticContextualEnv::StochasticContextualEnv(std::vector<std::vector<double>> means,
                                                 std::vector<double> context_probs, std::string name)
    : means_(std::move(means)), context_probs_(std::move(context_probs)), name_(std::move(name)) {
  if (means_.empty() || means_[0].empty()) throw std::invalid_argument("StochasticContextualEnv: empty mean table");
  num_arms_ = static_cast<int>(means_[0].size());
  for (const auto& row : means_) {
    if (static_cast<int>(row.size()) != num_arms_) throw std::invalid_argument("StochasticContextualEnv: ragged mean table");
    for (double m : row) {
      if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("StochasticContextualEnv: means must lie in [0, 1]");
    }
  }
  if (context_probs_.empty()) context_probs_.assign(means_.size(), 1.0 / static_cast<double>(means_.size()));
  if (context_probs_.size() != means_.size()) throw std::invalid_argument("StochasticContextualEnv: context distribution has wrong length");
  const auto normalized = SimplexWeights::normalize(context_probs_);
  context_probs_.assign(normalized.values().begin(), normalized.values().end());
}

Context StochasticContextualEnv::next_context(Rng& rng) {
  current_ = static_cast<int>(rng.categorical(context_probs_));
  return Categorical{current_};
}

Feedback StochasticContextualEnv::play(Arm arm, Rng& rng) {
  if (current_ < 0) throw std::logic_error("StochasticContextualEnv: play before next_context");
  const double m = means_[static_cast<std::size_t>(current_)].at(static_cast<std::size_t>(arm.index));
  return Feedback{rng.bernoulli(m) ? 1.0 : 0.0, false, {}};
}

double StochasticContextualEnv::mean_loss(const Context& context, Arm arm) const {
  const auto* c = std::get_if<Categorical>(&context);
  if (!c || c->id < 0 || static_cast<std::size_t>(c->id) >= means_.size()) {
    throw OracleError("StochasticContextualEnv: unknown context " + describe(context));
  }
  if (arm.index < 0 || arm.index >= num_arms_) throw OracleError("StochasticContextualEnv: arm out of range");
  return means_[static_cast<std::size_t>(c->id)][static_cast<std::size_t>(arm.index)];
}

// ---- S-switch --------------------------------------------------------------

std::int64_t sswitch_n_max(int num_arms, double delta) {
  const double raw = static_cast<double>(num_arms - 1) / (192.0 * delta * delta);
  // guard against 1.0000000000000002-style rounding pushing the ceiling up
  return static_cast<std::int64_t>(std::ceil(raw - 1e-9 * raw));
}

double sswitch_theorem_tuning(int switches, int num_arms, std::int64_t horizon, double complexity) {
  if (switches < 1 || num_arms < 3 || horizon < 1 || !(complexity > 0.0)) {
    throw std::invalid_argument("sswitch_theorem_tuning: need S >= 1, K >= 3, T >= 1, C > 0");
  }
  const double a = switches * std::sqrt(num_arms - 1.0) / (3072.0 * complexity * std::sqrt(static_cast<double>(horizon)));
  return std::min(a, 1.0 / (8.0 * std::sqrt(3.0)));
}

double sswitch_mean(int num_arms, int switches, double delta, int phase, int optimal_arm, Arm arm) {
  if (phase > switches) return 0.0;
  if (arm.index == num_arms - 1) return 0.5 - 0.875 * delta;
  if (arm.index == optimal_arm) return 0.5 - delta;
  return 0.5;
}

namespace {

void check_switch_args(int num_arms, int switches, double delta) {
  if (num_arms < 3) throw std::invalid_argument("SwitchAdversary: need K >= 3");
  if (switches < 1) throw std::invalid_argument("SwitchAdversary: need S >= 1");
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("SwitchAdversary: Delta must lie in (0, 1/2)");
}

}  // namespace

SwitchAdversary::SwitchAdversary(int num_arms, int switches, double delta, Rng& setup_rng)
    : num_arms_(num_arms), switches_(switches), delta_(delta) {
  check_switch_args(num_arms, switches, delta);
  n_max_ = sswitch_n_max(num_arms, delta);
  for (int s = 0; s < switches; ++s) {
    optimal_arms_.push_back(static_cast<int>(setup_rng.uniform_index(static_cast<std::size_t>(num_arms - 1))));
  }
}

SwitchAdversary::SwitchAdversary(int num_arms, int switches, double delta, std::vector<int> optimal_arms)
    : num_arms_(num_arms), switches_(switches), delta_(delta), optimal_arms_(std::move(optimal_arms)) {
  check_switch_args(num_arms, switches, delta);
  n_max_ = sswitch_n_max(num_arms, delta);
  if (static_cast<int>(optimal_arms_.size()) != switches) throw std::invalid_argument("SwitchAdversary: need S optimal arms");
  for (int a : optimal_arms_) {
    if (a < 0 || a >= num_arms - 1) throw std::invalid_argument("SwitchAdversary: optimal arms must lie in [K-1]");
  }
}

double SwitchAdversary::current_mean(Arm arm) const {
  const int opt = phase_ <= switches_ ? optimal_arms_[static_cast<std::size_t>(phase_ - 1)] : -1;
  return sswitch_mean(num_arms_, switches_, delta_, phase_, opt, arm);
}

Feedback SwitchAdversary::play(Arm arm, Rng& rng) {
  if (arm.index < 0 || arm.index >= num_arms_) throw std::invalid_argument("SwitchAdversary: arm out of range");
  const double loss = rng.bernoulli(current_mean(arm)) ? 1.0 : 0.0;
  if (phase_ <= switches_ && arm.index < num_arms_ - 1) {
    if (++plays_in_phase_ == n_max_) {
      ++phase_;
      plays_in_phase_ = 0;
    }
  }
  return Feedback{loss, false, {}};
}

double SwitchAdversary::mean_loss(const Context& context, Arm arm) const {
  const auto* c = std::get_if<PhaseCounter>(&context);
  if (!c || c->phase < 1 || c->phase > switches_ + 1) throw OracleError("SwitchAdversary: unknown context " + describe(context));
  if (arm.index < 0 || arm.index >= num_arms_) throw OracleError("SwitchAdversary: arm out of range");
  const int opt = c->phase <= switches_ ? optimal_arms_[static_cast<std::size_t>(c->phase - 1)] : -1;
  return sswitch_mean(num_arms_, switches_, delta_, c->phase, opt, arm);
}

ObliviousSwitchEnv::ObliviousSwitchEnv(int num_arms, int phases, double delta, std::int64_t horizon, Rng& setup_rng)
    : num_arms_(num_arms), phases_(phases), delta_(delta), horizon_(horizon) {
  check_switch_args(num_arms, phases, delta);
  if (horizon < phases) throw std::invalid_argument("ObliviousSwitchEnv: horizon shorter than the number of phases");
  // consecutive phases get different optimal arms so each boundary is a real switch
  for (int s = 0; s < phases; ++s) {
    int a = static_cast<int>(setup_rng.uniform_index(static_cast<std::size_t>(num_arms - 1)));
    if (s > 0 && a == optimal_arms_.back()) {
      a = (a + 1 + static_cast<int>(setup_rng.uniform_index(static_cast<std::size_t>(num_arms - 2)))) % (num_arms - 1);
    }
    optimal_arms_.push_back(a);
  }
}

Context ObliviousSwitchEnv::next_context(Rng&) {
  phase_ = 1 + static_cast<int>((t_ * phases_) / horizon_);
  if (phase_ > phases_) phase_ = phases_;
  ++t_;
  return PhaseCounter{phase_};
}

Feedback ObliviousSwitchEnv::play(Arm arm, Rng& rng) {
  const double m = sswitch_mean(num_arms_, phases_, delta_, phase_, optimal_arms_[static_cast<std::size_t>(phase_ - 1)], arm);
  return Feedback{rng.bernoulli(m) ? 1.0 : 0.0, false, {}};
}

double ObliviousSwitchEnv::mean_loss(const Context& context, Arm arm) const {
  const auto* c = std::get_if<PhaseCounter>(&context);
  if (!c || c->phase < 1 || c->phase > phases_) throw OracleError("ObliviousSwitchEnv: unknown context " + describe(context));
  if (arm.index < 0 || arm.index >= num_arms_) throw OracleError("ObliviousSwitchEnv: arm out of range");
  return sswitch_mean(num_arms_, phases_, delta_, c->phase, optimal_arms_[static_cast<std::size_t>(c->phase - 1)], arm);
}

// ---- lower-bound family ----------------------------------------------------

std::vector<std::uint8_t> sample_z(int k, double delta, int env_index, Rng& rng) {
  std::vector<std::uint8_t> z(static_cast<std::size_t>(k));
  std::uint64_t word = 0;
  int left = 0;
  for (int i = 0; i < k; ++i) {
    if (left == 0) {
      word = rng.bits();
      left = 64;
    }
    z[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(word & 1U);
    word >>= 1;
    --left;
  }
  if (env_index >= 1) z[static_cast<std::size_t>(env_index - 1)] = rng.bernoulli(0.5 * (1.0 - delta)) ? 1 : 0;
  return z;
}

ReconstructedRound reconstruct_losses(const std::vector<std::uint8_t>& z, int x_first, double delta) {
  if (x_first != 1 && x_first != 2) throw std::invalid_argument("reconstruct_losses: x_first must be 1 or 2");
  if (z.empty()) throw std::invalid_argument("reconstruct_losses: empty z");
  ReconstructedRound r;
  const double z1 = z[0];
  r.losses[static_cast<std::size_t>(x_first - 1)] = z1;
  r.losses[static_cast<std::size_t>(2 - x_first)] = 1.0 - z1;
  r.losses[2] = 0.5 - 0.25 * delta;
  r.context.bits.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    r.context.bits[i] = static_cast<std::uint8_t>(z[i] == z[0] ? x_first : 3 - x_first);
  }
  return r;
}

std::vector<std::uint8_t> forward_z(const std::array<double, 3>& losses, const BitVector& context) {
  std::vector<std::uint8_t> z(context.bits.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = losses[context.bits[i] - 1U] > 0.5 ? 1 : 0;
  return z;
}

LowerBoundEnv::LowerBoundEnv(int k, double delta, int env_index) : k_(k), delta_(delta), env_index_(env_index) {
  if (k < 1) throw std::invalid_argument("LowerBoundEnv: need k >= 1");
  if (!(delta > 0.0 && delta <= 0.5)) throw std::invalid_argument("LowerBoundEnv: Delta must lie in (0, 1/2]");
  if (env_index < 0 || env_index > k) throw std::invalid_argument("LowerBoundEnv: env index must lie in {0..k}");
}

Context LowerBoundEnv::next_context(Rng& rng) {
  z_ = sample_z(k_, delta_, env_index_, rng);
  const int x_first = rng.bernoulli(0.5) ? 2 : 1;
  round_ = reconstruct_losses(z_, x_first, delta_);
  return round_.context;
}

Feedback LowerBoundEnv::play(Arm arm, Rng&) {
  if (arm.index < 0 || arm.index > 2) throw std::invalid_argument("LowerBoundEnv: arm out of range");
  if (z_.empty()) throw std::logic_error("LowerBoundEnv: play before next_context");
  Feedback f;
  f.loss = round_.losses[static_cast<std::size_t>(arm.index)];
  f.revealed = arm.index < 2;
  if (f.revealed) f.z = z_;
  return f;
}

double LowerBoundEnv::mean_loss(const Context& context, Arm arm) const {
  if (arm.index == 2) return 0.5 - 0.25 * delta_;
  if (arm.index < 0 || arm.index > 2) throw OracleError("LowerBoundEnv: arm out of range");
  const auto* x = std::get_if<BitVector>(&context);
  if (!x || static_cast<int>(x->bits.size()) != k_) throw OracleError("LowerBoundEnv: unknown context " + describe(context));
  if (env_index_ == 0) return 0.5;
  const bool agrees = x->bits[static_cast<std::size_t>(env_index_ - 1)] == arm.index + 1;
  return agrees ? 0.5 * (1.0 - delta_) : 0.5 * (1.0 + delta_);
}

LowerBoundTuning lb_theorem_tuning(double log_k, double complexity, std::int64_t horizon) {
  if (!(complexity > 0.0) || horizon < 1) throw std::invalid_argument("lb_theorem_tuning: need C > 0 and T >= 1");
  const double t = static_cast<double>(horizon);
  if (kLowerBoundC2 * complexity * complexity > log_k) {
    std::ostringstream os;
    os << "lb_theorem_tuning: violated c2*C^2 <= ln k (" << kLowerBoundC2 * complexity * complexity << " > " << log_k << ")";
    throw std::invalid_argument(os.str());
  }
  if (log_k > t / 2.0) {
    std::ostringstream os;
    os << "lb_theorem_tuning: violated ln k <= T/2 (" << log_k << " > " << t / 2.0 << ")";
    throw std::invalid_argument(os.str());
  }
  const double delta = std::min(kLowerBoundC1 * log_k / (complexity * std::sqrt(t)), 0.25);
  const auto n = static_cast<std::int64_t>(std::floor(log_k / (20.0 * delta * delta)));
  if (static_cast<double>(n) > t / 2.0) throw std::logic_error("lb_theorem_tuning: N exceeds T/2");
  return {delta, n};
}

}  // namespace mslab
