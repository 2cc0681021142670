#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "echelon/baselines/base_stock.hpp"
#include "echelon/env/config.hpp"
#include "echelon/rl/observation.hpp"
#include "echelon/rl/ppo.hpp"

namespace echelon {

// Learning variants plus the two non-learning baselines.
enum class PolicyKind { kLearned, kBaseStock, kRandom };

struct ExperimentSpec {
  std::string variant = "CMARL";  // any variant_name(), "BSP" or "RANDOM"
  ChainConfig chain;
  PpoConfig ppo;
  BaseStockTuning base_stock;
  int episodes = 5000;
  int eval_every = 500;
  int eval_episodes = 20;
  std::uint64_t eval_seed_base = 1'000'000;
  int rolling_window = 100;
  std::uint64_t seed = 0;

  PolicyKind kind() const;
  // Only meaningful when kind() == kLearned.
  Variant learned_variant() const;
};

const std::vector<std::string>& experiment_tags();

// Experiment files hold the chain keys at the top level plus optional
// `experiment:`, `ppo:` and `base_stock:` mappings. Overrides use dotted
// paths over the fully resolved document, e.g. "ppo.learning_rate=1e-3".
ExperimentSpec parse_experiment_spec(const std::string& text, const std::vector<std::string>& overrides = {});
ExperimentSpec load_experiment_spec(const std::filesystem::path& path,
                                    const std::vector<std::string>& overrides = {});
std::string render_experiment_spec(const ExperimentSpec& spec);

// Throws ConfigError naming the offending field.
void validate_experiment_spec(const ExperimentSpec& spec);

// Deterministic 64-bit seed derivation (splitmix64 of the pair).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace echelon
