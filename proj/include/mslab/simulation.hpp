#pragma once

#include <cstdint>
#include <string>

#include "mslab/core.hpp"
#include "mslab/environments.hpp"
#include "mslab/rng.hpp"

namespace mslab {

// Something that acts in an environment. act() sees the context before the
// arm is chosen; observe() gets the bandit (or revealed) feedback.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual Arm act(const Context& context, Rng& rng) = 0;
  virtual void observe(const Context& context, Arm arm, const Feedback& feedback) = 0;
  virtual std::string name() const = 0;
  virtual std::int64_t reveals() const { return 0; }
  // Base index chosen this round, for corralling agents; -1 otherwise.
  virtual int last_base() const { return -1; }
};

// Runs T rounds. The environment draws from `env_rng`, the agent from
// `agent_rng`; the two never share a stream.
RegretTrace simulate(Environment& env, Agent& agent, std::int64_t horizon, Rng& env_rng, Rng& agent_rng);

}  // namespace mslab
