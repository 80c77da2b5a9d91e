#include "mslab/simulation.hpp"

#include <stdexcept>

namespace mslab {

RegretTrace simulate(Environment& env, Agent& agent, std::int64_t horizon, Rng& env_rng, Rng& agent_rng) {
  if (horizon < 0) throw std::invalid_argument("simulate: negative horizon");
  RegretTrace trace;
  trace.reserve(static_cast<std::size_t>(horizon));
  for (std::int64_t t = 1; t <= horizon; ++t) {
    Context x = env.next_context(env_rng);
    const Arm a = agent.act(x, agent_rng);
    if (a.index < 0 || a.index >= env.num_arms()) throw std::out_of_range("simulate: agent chose an arm outside [K]");
    Feedback f = env.play(a, env_rng);
    agent.observe(x, a, f);
    trace.record(StepRecord{t, a, f.loss, std::move(x), agent.last_base()});
  }
  return trace;
}

}  // namespace mslab
