#include "mslab/fullinfo.hpp"

#include <cmath>
#include <stdexcept>

namespace mslab {

double WrapperConfig::gamma() const {
  if (gamma_override > 0.0) return gamma_override;
  return 3.0 * std::pow(static_cast<double>(horizon), -0.5 + 0.5 * alpha);
}

void WrapperConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("wrapper config: horizon must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("wrapper config: alpha must lie in [0, 1)");
  if (k < 1) throw std::invalid_argument("wrapper config: k must be positive");
  const double g = gamma();
  if (!(g > 0.0 && g < 1.0)) {
    throw std::invalid_argument("wrapper config: gamma = " + std::to_string(g) + " outside (0, 1)");
  }
}

PolicyClass augmented_class(int k) {
  std::vector<Policy> experts;
  for (int i = 0; i < k; ++i) experts.emplace_back(ConstantArm{Arm{2}});
  for (int i = 0; i < k; ++i) experts.emplace_back(CoordinateProjection{static_cast<std::size_t>(i)});
  return PolicyClass("augmented", std::move(experts));
}

FullInfoWrapper::FullInfoWrapper(WrapperConfig config)
    : config_(config), gamma_(config.gamma()), experts_(augmented_class(config.k)), hedge_(config.num_experts()) {
  config_.validate();
}

PolicyDraw FullInfoWrapper::choose_policy(Rng& rng) const { return choose_policy(hedge_.distribution(), rng); }

PolicyDraw FullInfoWrapper::choose_policy(const SimplexWeights& p, Rng& rng) const {
  if (rng.uniform() < gamma_) {
    if (config_.exploration == Exploration::uniform) return {PolicyDraw::Kind::explore_uniform, 0};
    return {rng.uniform() < 1.0 / 3.0 ? PolicyDraw::Kind::explore_pi0 : PolicyDraw::Kind::explore_pi1, 0};
  }
  return {PolicyDraw::Kind::expert, rng.categorical(p.values())};
}

Arm FullInfoWrapper::resolve(const PolicyDraw& draw, const BitVector& context, Rng& rng) const {
  switch (draw.kind) {
    case PolicyDraw::Kind::explore_pi0: return Arm{2};
    case PolicyDraw::Kind::explore_pi1: return evaluate_policy(CoordinateProjection{0}, context);
    case PolicyDraw::Kind::explore_uniform: return Arm{static_cast<int>(rng.uniform_index(3))};
    case PolicyDraw::Kind::expert: break;
  }
  return evaluate_policy(experts_[draw.expert], context);
}

std::vector<double> FullInfoWrapper::fed_losses(const SimplexWeights& p, const BitVector& context, Arm arm,
                                                double loss) const {
  const std::size_t n = experts_.size();
  std::vector<bool> match(n);
  double mass = 0.0;
  const Context x = context;
  for (std::size_t e = 0; e < n; ++e) {
    match[e] = evaluate_policy(experts_[e], x) == arm;
    if (match[e]) mass += p[e];
  }
  const double g3 = gamma_ / 3.0;
  const double denom = g3 + (1.0 - gamma_) * mass;
  std::vector<double> fed(n, 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    if (match[e]) fed[e] = loss * g3 / denom;
  }
  return fed;
}

std::vector<double> FullInfoWrapper::update(const BitVector& context, Arm arm, double loss) {
  auto fed = fed_losses(hedge_.distribution(), context, arm, loss);
  hedge_.step(fed);
  return fed;
}

WrapperAgent::WrapperAgent(WrapperConfig config) : wrapper_(config) {}

Arm WrapperAgent::act(const Context& context, Rng& rng) {
  const PolicyDraw draw = wrapper_.choose_policy(rng);
  const auto* x = std::get_if<BitVector>(&context);
  if (!x) throw PolicyError("fullinfo wrapper needs BitVector contexts");
  return wrapper_.resolve(draw, *x, rng);
}

void WrapperAgent::observe(const Context& context, Arm arm, const Feedback& feedback) {
  if (arm.index < 2) ++reveals_;
  const auto fed = wrapper_.update(std::get<BitVector>(context), arm, feedback.loss);
  for (double v : fed) {
    max_fed_ = std::max(max_fed_, v);
    min_fed_ = std::min(min_fed_, v);
  }
}

VarianceProbe wrapper_variance_probe(const FullInfoWrapper& wrapper, const SimplexWeights& p, LowerBoundEnv& env,
                                     std::int64_t trials, Rng& rng) {
  if (trials < 1) throw std::invalid_argument("wrapper_variance_probe: need at least one trial");
  if (p.size() != wrapper.config().num_experts()) throw std::invalid_argument("wrapper_variance_probe: distribution has wrong length");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::int64_t t = 0; t < trials; ++t) {
    const PolicyDraw draw = wrapper.choose_policy(p, rng);
    const BitVector x = std::get<BitVector>(env.next_context(rng));
    const Arm a = wrapper.resolve(draw, x, rng);
    const double loss = env.play(a, rng).loss;
    const auto fed = wrapper.fed_losses(p, x, a, loss);
    double mean = 0.0;
    for (std::size_t e = 0; e < fed.size(); ++e) mean += p[e] * fed[e];
    double var = 0.0;
    for (std::size_t e = 0; e < fed.size(); ++e) var += p[e] * (fed[e] - mean) * (fed[e] - mean);
    sum += var;
    sum_sq += var * var;
  }
  const double n = static_cast<double>(trials);
  const double m = sum / n;
  const double v = std::max(0.0, sum_sq / n - m * m);
  return {m, std::sqrt(v / n)};
}

}  // namespace mslab
