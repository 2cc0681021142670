#include "echelon/baselines/base_stock.hpp"

#include <algorithm>
#include <cmath>

namespace echelon {
namespace {

std::int64_t to_grid(double gap, std::int64_t batch, std::int64_t top) {
  const auto units = std::max<std::int64_t>(0, std::llround(gap));
  const std::int64_t steps = (units + batch / 2) / batch;  // nearest multiple, halves up
  return std::clamp<std::int64_t>(steps * batch, 0, top);
}

}  // namespace

std::vector<std::int64_t> base_stock_order(const ChainConfig& config, std::span<const double> levels,
                                           std::span<const std::int64_t> on_hand,
                                           std::span<const std::int64_t> in_transit,
                                           std::span<const std::int64_t> unfulfilled) {
  const int n = config.num_stores;
  const int kk = config.num_products;
  const std::size_t size = static_cast<std::size_t>(n + 1) * kk;
  if (levels.size() != size || on_hand.size() != size || in_transit.size() != size ||
      unfulfilled.size() != size) {
    throw ContractError("base_stock_order: inputs must have (N + 1) * K entries");
  }
  const std::int64_t b = config.batch_size;
  const std::int64_t top = config.max_order();
  std::vector<std::int64_t> orders(size, 0);
  for (int k = 0; k < kk; ++k) {
    double echelon = 0.0;
    for (int w = 1; w <= n; ++w) {
      const std::size_t i = static_cast<std::size_t>(w) * kk + k;
      const double position = static_cast<double>(on_hand[i] + in_transit[i] - unfulfilled[i]);
      echelon += position;
      orders[i] = to_grid(levels[i] - position, b, top);
    }
    const auto i = static_cast<std::size_t>(k);
    echelon += static_cast<double>(on_hand[i] + in_transit[i] - unfulfilled[i]);
    orders[i] = to_grid(levels[i] - echelon, b, top);
  }
  return orders;
}

BaseStockPolicy::BaseStockPolicy(const ChainConfig& config, std::vector<double> levels)
    : config_(config) {
  const std::size_t size = static_cast<std::size_t>(config.num_stores + 1) * config.num_products;
  if (levels.size() != size) throw ContractError("BaseStockPolicy: levels must have (N + 1) * K entries");
  params_.levels = std::move(levels);
  params_.unfulfilled.assign(size, 0);
  on_hand_.assign(size, 0);
  in_transit_.assign(size, 0);
}

void BaseStockPolicy::begin_episode(const Env&) {
  std::fill(params_.unfulfilled.begin(), params_.unfulfilled.end(), 0);
}

ActionSet BaseStockPolicy::act(const Env& env) {
  const int n = config_.num_stores;
  const int kk = config_.num_products;
  const int t = env.clock();
  const auto& tb = env.tables();
  for (int k = 0; k < kk; ++k) {
    on_hand_[k] = tb.on_hand.at(t, 0, Column::kWarehouse, k);
    in_transit_[k] = tb.in_transit.at(t, 0, Column::kWarehouse, k);
    for (int v = 0; v < n; ++v) {
      const std::size_t i = static_cast<std::size_t>(v + 1) * kk + k;
      on_hand_[i] = tb.on_hand.at(t, v, Column::kStore, k);
      in_transit_[i] = tb.in_transit.at(t, v, Column::kStore, k);
    }
  }
  const auto orders = base_stock_order(config_, params_.levels, on_hand_, in_transit_, params_.unfulfilled);
  ActionSet a = ActionSet::full(config_);  // warehouse ships whatever stores ask for
  std::copy(orders.begin(), orders.begin() + kk, a.warehouse_request.begin());
  std::copy(orders.begin() + kk, orders.end(), a.store_requests.begin());
  return a;
}

void BaseStockPolicy::observe(const Env& env, const StepOutcome&) {
  const int t = env.clock() - 1;
  const auto& tb = env.tables();
  const int kk = config_.num_products;
  for (int v = 0; v < config_.num_stores; ++v) {
    for (int k = 0; k < kk; ++k) {
      const std::size_t i = static_cast<std::size_t>(v + 1) * kk + k;
      params_.unfulfilled[i] += tb.demand.at(t, v, k) - tb.sales.at(t, v, Column::kStore, k);
      params_.unfulfilled[k] +=
          tb.requested.at(t, v, Column::kStore, k) - tb.accepted.at(t, v, Column::kStore, k);
    }
  }
}

std::vector<double> initial_base_stock_levels(const ChainConfig& config) {
  const int n = config.num_stores;
  const int kk = config.num_products;
  std::vector<double> z(static_cast<std::size_t>(n + 1) * kk, 0.0);
  for (int k = 0; k < kk; ++k) {
    double chain = 0.0;
    for (int v = 0; v < n; ++v) {
      const double mu = config.demand_mean[v][k];
      const double zs = mu * (config.store_lead_times[v] + 1);
      z[static_cast<std::size_t>(v + 1) * kk + k] = zs;
      chain += mu * (config.warehouse_lead_time + 1) + zs;
    }
    z[k] = chain;
  }
  return z;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(std::max(count, 0)));
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = first + i;
  return seeds;
}

double mean_base_stock_return(const ChainConfig& config, std::span<const double> levels,
                              std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) return 0.0;
  Env env(config, seeds.front());
  BaseStockPolicy policy(config, std::vector<double>(levels.begin(), levels.end()));
  Money total;
  for (const auto seed : seeds) {
    env.reset(seed);
    total += run_episode(env, policy).total_reward;
  }
  return total.to_double() / static_cast<double>(seeds.size());
}

TunedBaseStock optimize_base_stock(const ChainConfig& config, const BaseStockTuning& tuning) {
  const auto seeds = seed_range(tuning.seed_base, tuning.episodes_per_eval);
  PowellOptions options = tuning.powell;
  options.project_nonnegative = true;
  const Objective objective = [&](std::span<const double> z) {
    return -mean_base_stock_return(config, z, seeds);
  };
  TunedBaseStock tuned;
  tuned.search = powell_minimize(objective, initial_base_stock_levels(config), options);
  tuned.levels = tuned.search.x;
  tuned.mean_return = -tuned.search.f;
  return tuned;
}

}  // namespace echelon
