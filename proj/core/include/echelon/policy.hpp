#pragma once

#include "echelon/env/env.hpp"

namespace echelon {

// Anything that can drive an Env for an episode.
class ActionPolicy {
 public:
  virtual ~ActionPolicy() = default;
  virtual void begin_episode(const Env& env) { (void)env; }
  virtual ActionSet act(const Env& env) = 0;
  // Called after each step with the env already advanced.
  virtual void observe(const Env& env, const StepOutcome& outcome) {
    (void)env;
    (void)outcome;
  }
};

struct EpisodeResult {
  Money total_reward;
  RewardComponents components;
  int stockouts = 0;  // (period, store) pairs with zero stock facing positive demand
};

// Stores facing positive demand with nothing on hand at the env's current period.
int stockouts_now(const Env& env);
void accumulate(EpisodeResult& result, const StepOutcome& outcome);

// Runs one full episode from the env's current reset state.
EpisodeResult run_episode(Env& env, ActionPolicy& policy);

}  // namespace echelon
