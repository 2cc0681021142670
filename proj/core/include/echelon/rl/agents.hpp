#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "echelon/env/env.hpp"
#include "echelon/policy.hpp"
#include "echelon/rl/observation.hpp"
#include "echelon/rl/policy_net.hpp"
#include "echelon/rl/ppo.hpp"

namespace echelon {

// Categorical draws for a batch of observations (one per column).
struct SampledHeads {
  std::vector<int> actions;  // (batch, heads), sample-major
  std::vector<double> log_probs;  // joint over heads
  std::vector<double> values;
};

// Samples each head independently, or takes its argmax (lowest index on ties)
// when greedy. The joint log-probability is the sum of the per-head ones.
SampledHeads sample_heads(const PolicyNet& net, const Eigen::MatrixXd& obs, std::mt19937_64& rng, bool greedy);

enum class AgentRole { kStore, kWarehouse, kCentral };

struct Agent {
  AgentRole role = AgentRole::kStore;
  int store = -1;  // store index for kStore
  int units = 1;   // decisions per env per period: K for shared-product policies, else 1
  PolicyNet net;
  Adam adam;
  Trajectory traj;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every learning agent of one variant, trained synchronously.
//
// Stores own K order heads; the warehouse owns K order heads plus N * K
// allocation heads. Shared-product variants build each agent for K = 1 and
// apply it to every product in turn. The single-agent variant has one
// policy whose heads are all store requests then the warehouse requests;
// it proposes full allocations and leaves rationing to the env.
class AgentSystem {
 public:
  enum class Mode { kSample, kGreedy };

  AgentSystem(const ChainConfig& config, Variant variant, const PpoConfig& ppo, std::uint64_t seed);

  const ChainConfig& config() const { return config_; }
  Variant variant() const { return variant_; }
  const PpoConfig& ppo() const { return ppo_; }
  std::vector<Agent>& agents() { return agents_; }
  const std::vector<Agent>& agents() const { return agents_; }

  // Sizes the trajectory buffers for a batch of `envs` full episodes.
  void begin_collection(int envs);
  // Joint actions for a lockstep batch of envs that share one clock. In
  // sample mode with an open collection the transitions are recorded.
  std::vector<ActionSet> act(std::span<const Env* const> envs, Mode mode);
  // Rewards for the step each env just took.
  void record_rewards(std::span<const Env* const> envs, std::span<const StepOutcome> outcomes);
  // GAE plus one PPO update per agent; closes the collection.
  std::vector<UpdateStats> update();
  // Sets every agent's learning rate to ppo.learning_rate * fraction.
  void set_learning_rate_fraction(double fraction);

  // Flat binary of parameters preceded by a text manifest.
  void save(const std::filesystem::path& path) const;
  // Refuses (CheckpointError) if the manifest does not match this system.
  void load(const std::filesystem::path& path);
  std::string manifest() const;

 private:
  void add_agent(AgentRole role, int store, int units, int obs_size, int heads);
  void observe(const Agent& agent, const Env& env, int unit, std::span<double> out) const;
  void apply(const Agent& agent, const int* heads, int unit, ActionSet& actions) const;
  double reward_for(const Agent& agent, int unit, const StepOutcome& outcome,
                    const std::vector<Money>& product) const;

  ChainConfig config_;
  Variant variant_;
  VariantTraits traits_;
  PpoConfig ppo_;
  std::mt19937_64 rng_;
  std::vector<Agent> agents_;
  int collecting_envs_ = 0;
};

// Drives one env with an AgentSystem, greedily by default.
class AgentPolicy : public ActionPolicy {
 public:
  explicit AgentPolicy(AgentSystem& system, AgentSystem::Mode mode = AgentSystem::Mode::kGreedy)
      : system_(system), mode_(mode) {}
  ActionSet act(const Env& env) override;

 private:
  AgentSystem& system_;
  AgentSystem::Mode mode_;
};

}  // namespace echelon
