#include "mslab/learners.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mslab {

namespace {

constexpr std::size_t kMemoLimit = 4096;

void shift_to_zero_max(std::vector<double>& lw) {
  const double top = *std::max_element(lw.begin(), lw.end());
  for (double& v : lw) v -= top;
}

}  // namespace

// ---- EXP4 ----------------------------------------------------------------

Exp4::Exp4(PolicyClass policies, int num_arms) : Exp4(std::move(policies), num_arms, Options{}) {}

Exp4::Exp4(PolicyClass policies, int num_arms, Options options)
    : policies_(std::move(policies)),
      num_arms_(num_arms),
      options_(options),
      log_weights_(policies_.size(), 0.0) {
  if (num_arms_ < 1) throw std::invalid_argument("Exp4: need at least one arm");
  if (options_.fixed_learning_rate && !(*options_.fixed_learning_rate > 0.0)) {
    throw std::invalid_argument("Exp4: learning rate must be positive");
  }
}

double Exp4::rate_for(double v) const {
  if (options_.fixed_learning_rate) return *options_.fixed_learning_rate;
  const double log_n = std::log(static_cast<double>(policies_.size()));
  return std::sqrt(log_n / (num_arms_ * (1.0 + v)));
}

double Exp4::learning_rate() const { return rate_for(variance_proxy_); }

const std::vector<int>& Exp4::arms_at(const Context& context) {
  if (auto it = memo_.find(context); it != memo_.end()) return it->second;
  std::vector<int> arms(policies_.size());
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const int a = evaluate_policy(policies_[i], context).index;
    if (a < 0 || a >= num_arms_) throw PolicyError("Exp4: policy returned an arm outside [K]");
    arms[i] = a;
  }
  if (memo_.size() < kMemoLimit) return memo_.emplace(context, std::move(arms)).first->second;
  scratch_arms_ = std::move(arms);
  return scratch_arms_;
}

const std::vector<double>& Exp4::weights() {
  if (weights_dirty_) {
    const auto w = SimplexWeights::from_log_weights(log_weights_);
    weights_.assign(w.values().begin(), w.values().end());
    weights_dirty_ = false;
  }
  return weights_;
}

SimplexWeights Exp4::policy_weights() const { return SimplexWeights::from_log_weights(log_weights_); }

SimplexWeights Exp4::arm_distribution(const Context& context) {
  const auto& arms = arms_at(context);
  const auto& w = weights();
  std::vector<double> p(static_cast<std::size_t>(num_arms_), 0.0);
  for (std::size_t i = 0; i < arms.size(); ++i) p[static_cast<std::size_t>(arms[i])] += w[i];
  return SimplexWeights::normalize(std::move(p));
}

void Exp4::update(const Context& context, Arm arm, double fed_loss) {
  if (!(fed_loss >= 0.0) || !std::isfinite(fed_loss)) throw std::invalid_argument("Exp4: fed loss must be finite and >= 0");
  if (fed_loss == 0.0) return;
  const auto& arms = arms_at(context);
  const auto& w = weights();
  double p_arm = 0.0;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    if (arms[i] == arm.index) p_arm += w[i];
  }
  if (p_arm <= 0.0) throw std::logic_error("Exp4: positive loss on an arm with zero probability");
  variance_proxy_ += fed_loss * fed_loss;
  if (policies_.size() == 1) return;
  const double step = rate_for(variance_proxy_) * fed_loss / p_arm;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    if (arms[i] == arm.index) log_weights_[i] -= step;
  }
  shift_to_zero_max(log_weights_);
  weights_dirty_ = true;
}

// ---- EXP3 ----------------------------------------------------------------

Exp3::Exp3(int num_arms, double learning_rate, double mixing, std::vector<double> initial_log_weights)
    : num_arms_(num_arms), learning_rate_(learning_rate), mixing_(mixing), log_weights_(std::move(initial_log_weights)) {
  if (num_arms_ < 1) throw std::invalid_argument("Exp3: need at least one arm");
  if (!(learning_rate_ > 0.0)) throw std::invalid_argument("Exp3: learning rate must be positive");
  if (!(mixing_ >= 0.0 && mixing_ <= 1.0)) throw std::invalid_argument("Exp3: mixing must lie in [0, 1]");
  if (log_weights_.empty()) log_weights_.assign(static_cast<std::size_t>(num_arms_), 0.0);
  if (log_weights_.size() != static_cast<std::size_t>(num_arms_)) throw std::invalid_argument("Exp3: prior has wrong length");
}

SimplexWeights Exp3::distribution() const {
  const auto w = SimplexWeights::from_log_weights(log_weights_);
  if (mixing_ == 0.0) return w;
  std::vector<double> p(w.values().begin(), w.values().end());
  for (double& v : p) v = (1.0 - mixing_) * v + mixing_ / num_arms_;
  return SimplexWeights::normalize(std::move(p));
}

Arm Exp3::sample(Rng& rng) const { return Arm{static_cast<int>(rng.categorical(distribution().values()))}; }

void Exp3::update(Arm arm, double loss) {
  if (loss == 0.0) return;
  const double p = distribution()[static_cast<std::size_t>(arm.index)];
  log_weights_[static_cast<std::size_t>(arm.index)] -= learning_rate_ * loss / p;
  shift_to_zero_max(log_weights_);
}

// ---- EXP3.S --------------------------------------------------------------

Exp3S::Exp3S(int num_arms, double learning_rate, double mixing)
    : weights_(static_cast<std::size_t>(num_arms), 1.0 / num_arms), learning_rate_(learning_rate), mixing_(mixing) {
  if (num_arms < 1) throw std::invalid_argument("Exp3S: need at least one arm");
  if (!(learning_rate_ > 0.0)) throw std::invalid_argument("Exp3S: learning rate must be positive");
  if (!(mixing_ > 0.0 && mixing_ < 1.0)) throw std::invalid_argument("Exp3S: mixing must lie in (0, 1)");
}

Arm Exp3S::sample(Rng& rng) const { return Arm{static_cast<int>(rng.categorical(weights_))}; }

void Exp3S::update(Arm arm, double loss) {
  const auto a = static_cast<std::size_t>(arm.index);
  const double k = static_cast<double>(weights_.size());
  weights_[a] *= std::exp(-learning_rate_ * loss / weights_[a]);
  double sum = 0.0;
  for (double v : weights_) sum += v;
  for (double& v : weights_) v = (1.0 - mixing_) * (v / sum) + mixing_ / k;
}

std::vector<double> Exp3S::log_weights() const {
  std::vector<double> out(weights_.size());
  std::transform(weights_.begin(), weights_.end(), out.begin(), [](double v) { return std::log(v); });
  return out;
}

// ---- second-order Hedge --------------------------------------------------

SecondOrderHedge::SecondOrderHedge(std::size_t num_experts) : log_weights_(num_experts, 0.0) {
  if (num_experts == 0) throw std::invalid_argument("SecondOrderHedge: need at least one expert");
}

double SecondOrderHedge::learning_rate() const {
  const double log_n = std::log(static_cast<double>(log_weights_.size()));
  return std::min(0.5, std::sqrt(log_n / (1.0 + second_order_)));
}

SimplexWeights SecondOrderHedge::step(std::span<const double> losses) {
  if (losses.size() != log_weights_.size()) throw std::invalid_argument("SecondOrderHedge: loss vector has wrong length");
  for (double l : losses) {
    if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("SecondOrderHedge: losses must lie in [0, 1]");
  }
  SimplexWeights p = distribution();
  double mean = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) mean += p[i] * losses[i];
  double var = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) var += p[i] * (losses[i] - mean) * (losses[i] - mean);
  const double eta = learning_rate();
  for (std::size_t i = 0; i < losses.size(); ++i) log_weights_[i] -= eta * losses[i];
  shift_to_zero_max(log_weights_);
  second_order_ += var;
  return p;
}

// ---- bandit over bandit --------------------------------------------------

std::vector<double> bob_learning_rate_grid(std::int64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("bob grid: horizon must be positive");
  const int jmax = static_cast<int>(std::ceil(std::log2(static_cast<double>(horizon))));
  std::vector<double> grid;
  for (int j = 0; j <= jmax; ++j) grid.push_back(std::ldexp(1.0, -j));
  return grid;
}

namespace {

double default_top_rate(std::size_t arms, std::int64_t epochs) {
  const double j = static_cast<double>(arms);
  if (arms < 2) return 1.0;
  return std::sqrt(2.0 * std::log(j) / (j * static_cast<double>(epochs)));
}

}  // namespace

BobProtocol::BobProtocol(int num_arms, std::int64_t horizon, std::int64_t epoch_length)
    : BobProtocol(num_arms, horizon, epoch_length, Options{}) {}

BobProtocol::BobProtocol(int num_arms, std::int64_t horizon, std::int64_t epoch_length, Options options)
    : num_arms_(num_arms),
      horizon_(horizon),
      epoch_length_(epoch_length),
      base_mixing_(options.base_mixing.value_or(1.0 / static_cast<double>(horizon))),
      grid_(options.grid.empty() ? bob_learning_rate_grid(horizon) : options.grid),
      top_(static_cast<int>(grid_.size()),
           options.top_learning_rate.value_or(default_top_rate(grid_.size(), horizon / std::max<std::int64_t>(1, epoch_length)))) {
  if (epoch_length_ < 1 || horizon_ < 1 || horizon_ % epoch_length_ != 0) {
    throw std::invalid_argument("BobProtocol: epoch length must divide the horizon");
  }
}

Arm BobProtocol::act(Rng& rng) {
  if (step_in_epoch_ == 0) {
    grid_arm_ = top_.sample(rng).index;
    base_.emplace(num_arms_, grid_[static_cast<std::size_t>(grid_arm_)], base_mixing_);
    epoch_loss_ = 0.0;
  }
  return base_->sample(rng);
}

void BobProtocol::observe(Arm arm, double loss) {
  if (!base_) throw std::logic_error("BobProtocol: observe before act");
  base_->update(arm, loss);
  epoch_loss_ += loss;
  if (++step_in_epoch_ == epoch_length_) {
    const double fed = epoch_loss_ / static_cast<double>(epoch_length_);
    top_.update(Arm{grid_arm_}, fed);
    fed_history_.push_back(fed);
    ++epochs_completed_;
    step_in_epoch_ = 0;
  }
}

}  // namespace mslab
