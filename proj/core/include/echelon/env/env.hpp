#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "echelon/env/config.hpp"
#include "echelon/env/money.hpp"
#include "echelon/env/tables.hpp"

namespace echelon {

class EpisodeComplete : public std::logic_error {
 public:
  EpisodeComplete() : std::logic_error("episode is complete; call reset() before stepping") {}
};

// Table contents violated a structural invariant; indicates a bug, not bad input.
class IntegrityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Caller broke an operation's precondition (bad action, wrong dimensions).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One synchronous joint action. Store-indexed arrays are flat [v * K + k].
struct ActionSet {
  std::vector<std::int64_t> store_requests;         // (N, K)
  std::vector<std::int64_t> warehouse_request;      // (K)
  std::vector<std::int64_t> warehouse_allocations;  // (N, K)

  static ActionSet zeros(const ChainConfig& config);
  // Every entry set to the top level n * b.
  static ActionSet full(const ChainConfig& config);
};

// Throws ContractError unless every entry is a multiple of b within [0, n * b].
void validate_actions(const ChainConfig& config, const ActionSet& actions);

struct RewardComponents {
  Money sales_revenue;
  Money holding_cost;
  Money procurement_cost;
  Money unfulfilled_penalty;

  friend bool operator==(const RewardComponents&, const RewardComponents&) = default;
};

struct StepOutcome {
  Money shared_reward;
  std::vector<Money> local_rewards;  // (N + 1), index 0 is the warehouse
  RewardComponents components;
  bool done = false;

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

// Prices converted once to fixed-point, laid out to match the tables.
struct PriceBook {
  std::vector<Money> selling;        // (N, K)
  std::vector<Money> store_holding;  // (N, K)
  std::vector<Money> warehouse_holding;  // (K)
  std::vector<Money> procurement;    // (K)
  Money unfulfilled;

  explicit PriceBook(const ChainConfig& config);
  PriceBook() = default;
};

// Everything a step reads or writes, separable from the RNG for oracle testing.
struct EnvState {
  ChainConfig config;
  EnvTables tables;
};

// ---- Element-wise operations on (N, K) flat arrays ----

// s = min(demand, on_hand) element-wise.
std::vector<std::int64_t> resolve_sales(std::span<const std::int64_t> on_hand,
                                        std::span<const std::int64_t> demand);

// Caps proposals by requests, then repairs infeasible products by
// largest-remainder proportional scaling (ties to the lower store index).
std::vector<std::int64_t> resolve_allocation(std::span<const std::int64_t> requests,
                                             std::span<const std::int64_t> proposed,
                                             std::span<const std::int64_t> warehouse_on_hand,
                                             int num_stores, int num_products);

// ---- Reward terms for a period t whose dynamics have been applied ----
// Holding cost is charged on end-of-period stock I(t + 1); the warehouse
// shortfall term uses the period-start warehouse stock I(t).

Money sales_revenue(const PriceBook& prices, const EnvTables& tables, int t);
Money holding_cost(const PriceBook& prices, const EnvTables& tables, int t);
Money procurement_cost(const ChainConfig& config, const PriceBook& prices, const EnvTables& tables, int t);
Money unfulfilled_penalty(const PriceBook& prices, const EnvTables& tables, int t);
Money shared_reward(const RewardComponents& c);
RewardComponents reward_components(const ChainConfig& config, const PriceBook& prices,
                                   const EnvTables& tables, int t);
// Partition of the shared reward by term ownership; sums exactly to shared_reward.
std::vector<Money> local_rewards(const ChainConfig& config, const PriceBook& prices,
                                 const EnvTables& tables, int t);
// Shared reward restricted to product k; sums over k to shared_reward.
std::vector<Money> product_rewards(const ChainConfig& config, const PriceBook& prices,
                                   const EnvTables& tables, int t);

// I_Transit(t + 1) = I_Transit(t) - R(t - l) + R(t) for every vertex.
void update_in_transit(const ChainConfig& config, EnvTables& tables, int t);

// Accepted order placed at period t - l for a row/column; zero before the horizon start.
inline std::int64_t arrival(const EnvTables& tables, int t, int lead, int v, Column c, int k) {
  return t - lead < 0 ? 0 : tables.accepted.at(t - lead, v, c, k);
}

// Seeded, vectorized supply-chain environment.
//
// Demand for the whole episode is drawn at reset from the env's own stream,
// v-major then k-minor within a period, periods in order.
class Env {
 public:
  Env(ChainConfig config, std::uint64_t seed);

  // Starts a new episode, continuing the current random stream.
  void reset();
  // Starts a new episode from a fresh stream.
  void reset(std::uint64_t seed);

  StepOutcome step(const ActionSet& actions);

  // Draws D(t) from the stream; reset() calls this for t = 0..T-1.
  std::span<const std::int64_t> sample_demand(int t);
  // Replaces D(t) with a recorded (N, K) demand slab, e.g. to replay history.
  void replay_demand(int t, std::span<const std::int64_t> demand);

  const ChainConfig& config() const { return state_.config; }
  const EnvTables& tables() const { return state_.tables; }
  const EnvState& state() const { return state_; }
  const PriceBook& prices() const { return prices_; }
  int clock() const { return state_.tables.clock; }
  bool done() const { return state_.tables.clock >= state_.config.horizon; }
  int num_stores() const { return state_.config.num_stores; }
  int num_products() const { return state_.config.num_products; }

 private:
  void clear_tables();

  EnvState state_;
  PriceBook prices_;
  std::mt19937_64 rng_;
  std::vector<std::poisson_distribution<long long>> demand_dists_;  // (N, K)

  // Scratch buffers reused across steps.
  std::vector<std::int64_t> accepted_;
  std::vector<std::int64_t> shipped_;
  std::vector<std::int64_t> scratch_;
  std::vector<std::int64_t> asked_;
};

// Creates and seeds an env after validating the configuration.
Env create_env(ChainConfig config, std::uint64_t seed);

}  // namespace echelon
