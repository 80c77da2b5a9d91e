#include "mslab/corral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mslab/ftrl.hpp"

namespace mslab {

CorralTuning tune_from_budgets(std::span<const double> complexities, double tradeoff, std::int64_t horizon) {
  if (complexities.empty()) throw std::invalid_argument("tune_from_budgets: no bases");
  if (!(tradeoff > 0.0) || horizon < 1) throw std::invalid_argument("tune_from_budgets: need C > 0 and T >= 1");
  const double m = static_cast<double>(complexities.size());
  const double t = static_cast<double>(horizon);
  CorralTuning out;
  for (double c : complexities) {
    if (!(c > 0.0)) throw std::invalid_argument("tune_from_budgets: complexities must be positive");
    out.R.push_back(std::sqrt(c * t));
    out.beta.push_back(std::min(1.0, std::max(1.0, tradeoff * tradeoff / c) / m));
  }
  out.eta = 1.0 / std::sqrt(t);
  return out;
}

HedgedCorral::HedgedCorral(CorralTuning tuning) : tuning_(std::move(tuning)) {
  const std::size_t m = tuning_.R.size();
  if (m == 0 || tuning_.beta.size() != m) throw std::invalid_argument("HedgedCorral: R and beta must have equal positive length");
  if (!(tuning_.eta > 0.0)) throw std::invalid_argument("HedgedCorral: eta must be positive");
  for (std::size_t i = 0; i < m; ++i) {
    if (!(tuning_.beta[i] > 0.0 && tuning_.beta[i] <= 1.0)) throw std::invalid_argument("HedgedCorral: beta must lie in (0, 1]");
    if (!(tuning_.R[i] >= 0.0)) throw std::invalid_argument("HedgedCorral: R must be non-negative");
  }
  L_.assign(m, 0.0);
  running_min_.assign(m, std::numeric_limits<double>::infinity());
  rho_.resize(m);
  B_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    rho_[i] = 1.0 / tuning_.beta[i];
    B_[i] = std::sqrt(rho_[i]) * tuning_.R[i];
  }
  // Empty history: rho_1 = 1/beta, B_0 = R/sqrt(beta).
  q_ = solve_tsallis_ftrl_detailed(shifted(), tuning_.eta).q;
  last_bias_.assign(m, 0.0);
}

std::vector<double> HedgedCorral::shifted() const {
  std::vector<double> g(L_.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = L_[i] - B_[i];
  return g;
}

HedgedCorral::Selection HedgedCorral::select(Rng& rng) const { return {q_, rng.categorical(q_.values())}; }

void HedgedCorral::update(std::size_t base, double loss) {
  if (base >= size()) throw std::out_of_range("HedgedCorral: base index out of range");
  if (!(loss >= 0.0 && loss <= 1.0)) throw std::invalid_argument("HedgedCorral: loss must lie in [0, 1]");
  if (!(q_[base] > 0.0)) throw CorralError("HedgedCorral: selected base has zero probability");
  L_[base] += loss / q_[base];
  ++t_;
  // The q just played joins the history before the next q is hedged.
  for (std::size_t i = 0; i < size(); ++i) running_min_[i] = std::min(running_min_[i], q_[i]);
  enforce_bias_constraint(solve_tsallis_ftrl_detailed(shifted(), tuning_.eta).q);
}

void HedgedCorral::enforce_bias_constraint(const SimplexWeights& tentative) {
  const std::size_t m = size();
  last_bias_.assign(m, 0.0);
  SimplexWeights q = tentative;
  const int cap = 50 * static_cast<int>(m);
  int pass = 0;
  for (;; ++pass) {
    if (pass >= cap) {
      throw CorralError("bias fixed point did not settle within " + std::to_string(cap) + " passes at round " +
                        std::to_string(t_));
    }
    bool changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      running_min_[i] = std::min(running_min_[i], q[i]);
      const double rho_new = 1.0 / std::min(tuning_.beta[i], running_min_[i]);
      if (rho_new > rho_[i]) {
        const double b_new = std::sqrt(rho_new) * tuning_.R[i];
        last_bias_[i] += b_new - B_[i];
        B_[i] = b_new;
        rho_[i] = rho_new;
        changed = changed || tuning_.R[i] > 0.0;
      }
    }
    if (!changed) break;
    q = solve_tsallis_ftrl_detailed(shifted(), tuning_.eta).q;
  }
  last_passes_ = pass;
  q_ = std::move(q);
  for (std::size_t i = 0; i < m; ++i) bias_cost_ += q_[i] * last_bias_[i];
}

double HedgedCorral::hedge_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < size(); ++i) worst = std::max(worst, std::abs(B_[i] - std::sqrt(rho_[i]) * tuning_.R[i]));
  return worst;
}

double HedgedCorral::rho_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    worst = std::max(worst, std::abs(rho_[i] - 1.0 / std::min(tuning_.beta[i], running_min_[i])));
  }
  return worst;
}

// ---- agents ------------------------------------------------------------------

CorralAgent::CorralAgent(std::vector<std::unique_ptr<BaseLearner>> bases, CorralTuning tuning, std::uint64_t root_seed)
    : bases_(std::move(bases)), corral_(std::move(tuning)), top_rng_(root_seed, stream::corral) {
  if (bases_.size() != corral_.size()) throw std::invalid_argument("CorralAgent: tuning length differs from the number of bases");
  for (std::size_t m = 0; m < bases_.size(); ++m) base_rngs_.emplace_back(root_seed, stream::base + m);
}

Arm CorralAgent::act(const Context& context, Rng&) {
  selected_ = corral_.select(top_rng_).base;
  return bases_[selected_]->propose(context, base_rngs_[selected_]);
}

void CorralAgent::observe(const Context& context, Arm arm, const Feedback& feedback) {
  bases_[selected_]->update(context, arm, corral_.fed_loss(selected_, feedback.loss));
  corral_.update(selected_, feedback.loss);
}

BaseAgent::BaseAgent(std::unique_ptr<BaseLearner> base, std::uint64_t root_seed)
    : base_(std::move(base)), rng_(root_seed, stream::base) {}

Arm BaseAgent::act(const Context& context, Rng&) { return base_->propose(context, rng_); }

void BaseAgent::observe(const Context& context, Arm arm, const Feedback& feedback) {
  base_->update(context, arm, feedback.loss);
}

RegretTrace run_corral(std::vector<std::unique_ptr<BaseLearner>> bases, Environment& env, std::int64_t horizon,
                       const CorralTuning& tuning, std::uint64_t root_seed,
                       const std::function<void(const HedgedCorral&)>& on_round) {
  CorralAgent agent(std::move(bases), tuning, root_seed);
  Rng env_rng(root_seed, stream::environment);
  RegretTrace trace;
  trace.reserve(static_cast<std::size_t>(std::max<std::int64_t>(horizon, 0)));
  for (std::int64_t t = 1; t <= horizon; ++t) {
    Context x = env.next_context(env_rng);
    const Arm a = agent.act(x, env_rng);
    Feedback f = env.play(a, env_rng);
    agent.observe(x, a, f);
    if (on_round) on_round(agent.corral());
    trace.record(StepRecord{t, a, f.loss, std::move(x), agent.last_base()});
  }
  return trace;
}

}  // namespace mslab
