#include "echelon/policy.hpp"

namespace echelon {

int stockouts_now(const Env& env) {
  const auto& c = env.config();
  const auto& tb = env.tables();
  const int t = env.clock();
  int count = 0;
  for (int v = 0; v < c.num_stores; ++v) {
    for (int k = 0; k < c.num_products; ++k) {
      if (tb.on_hand.at(t, v, Column::kStore, k) == 0 && tb.demand.at(t, v, k) > 0) {
        ++count;
        break;
      }
    }
  }
  return count;
}

void accumulate(EpisodeResult& result, const StepOutcome& outcome) {
  result.total_reward += outcome.shared_reward;
  result.components.sales_revenue += outcome.components.sales_revenue;
  result.components.holding_cost += outcome.components.holding_cost;
  result.components.procurement_cost += outcome.components.procurement_cost;
  result.components.unfulfilled_penalty += outcome.components.unfulfilled_penalty;
}

EpisodeResult run_episode(Env& env, ActionPolicy& policy) {
  EpisodeResult result;
  policy.begin_episode(env);
  while (!env.done()) {
    result.stockouts += stockouts_now(env);
    const auto outcome = env.step(policy.act(env));
    accumulate(result, outcome);
    policy.observe(env, outcome);
  }
  return result;
}

}  // namespace echelon
