#pragma once

#include <cstdint>
#include <random>

#include "echelon/env/env.hpp"
#include "echelon/policy.hpp"

namespace echelon {

// Draws every action entry uniformly from the grid {0, b, ..., n * b},
// using its own random stream so it never perturbs the env's demand.
class RandomPolicy : public ActionPolicy {
 public:
  RandomPolicy(const ChainConfig& config, std::uint64_t seed);

  ActionSet act(const Env& env) override;
  ActionSet draw();

 private:
  ChainConfig config_;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<int> level_;
};

}  // namespace echelon
