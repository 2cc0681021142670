#include "echelon/baselines/random_policy.hpp"

namespace echelon {

RandomPolicy::RandomPolicy(const ChainConfig& config, std::uint64_t seed)
    : config_(config), rng_(seed), level_(0, config.action_levels) {}

ActionSet RandomPolicy::act(const Env&) { return draw(); }

ActionSet RandomPolicy::draw() {
  ActionSet a = ActionSet::zeros(config_);
  const std::int64_t b = config_.batch_size;
  for (auto* lane : {&a.store_requests, &a.warehouse_request, &a.warehouse_allocations}) {
    for (auto& x : *lane) x = level_(rng_) * b;
  }
  return a;
}

}  // namespace echelon
