#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "echelon/baselines/powell.hpp"
#include "echelon/env/env.hpp"
#include "echelon/policy.hpp"

namespace echelon {

// Per-vertex base-stock levels and the running unmet-quantity tracker.
// Both are (N + 1, K), vertex-major with vertex 0 the warehouse.
struct BaseStockParams {
  std::vector<double> levels;
  std::vector<std::int64_t> unfulfilled;
};

// Order-up-to rule on echelon inventory position.
//
// A store's position is its own on-hand + in-transit - unfulfilled; the
// warehouse position adds the positions of every store it feeds. The gap
// z - position is rounded to the nearest unit, then to the nearest multiple
// of batch_size, and clamped to [0, n * b]. Inputs are (N + 1, K).
std::vector<std::int64_t> base_stock_order(const ChainConfig& config, std::span<const double> levels,
                                           std::span<const std::int64_t> on_hand,
                                           std::span<const std::int64_t> in_transit,
                                           std::span<const std::int64_t> unfulfilled);

class BaseStockPolicy : public ActionPolicy {
 public:
  BaseStockPolicy(const ChainConfig& config, std::vector<double> levels);

  void begin_episode(const Env& env) override;
  ActionSet act(const Env& env) override;
  // Accumulates lost customer demand (stores) and unmet store requests (warehouse).
  void observe(const Env& env, const StepOutcome& outcome) override;

  const BaseStockParams& params() const { return params_; }

 private:
  ChainConfig config_;
  BaseStockParams params_;
  std::vector<std::int64_t> on_hand_;
  std::vector<std::int64_t> in_transit_;
};

// Starting levels: mu * (l + 1) at each store; the warehouse adds its own
// lead-time demand for the whole chain on top of the store levels.
std::vector<double> initial_base_stock_levels(const ChainConfig& config);

// Mean shared episode return of a base-stock policy over a fixed seed set.
double mean_base_stock_return(const ChainConfig& config, std::span<const double> levels,
                              std::span<const std::uint64_t> seeds);

struct BaseStockTuning {
  int episodes_per_eval = 50;
  std::uint64_t seed_base = 1000;
  // Line searches step in whole units; finer resolution only chases rounding noise.
  PowellOptions powell{.max_iters = 200, .ftol = 1e-6, .line_tol = 1e-3, .initial_step = 5.0};
};

struct TunedBaseStock {
  std::vector<double> levels;
  double mean_return = 0.0;
  PowellResult search;
};

// Powell search over base-stock levels maximizing the mean return on
// common random numbers (the same episode seeds for every evaluation).
TunedBaseStock optimize_base_stock(const ChainConfig& config, const BaseStockTuning& tuning);

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count);

}  // namespace echelon
