#include "echelon/env/env.hpp"

#include <algorithm>
#include <numeric>

namespace echelon {
namespace {

// I_T(t + 1) = I_T(t) - arrivals + R(t) over one (N, 2, K) slab.
void advance_in_transit(std::span<const std::int64_t> prev, std::span<const std::int64_t> arrivals,
                        std::span<const std::int64_t> placed, std::span<std::int64_t> next) {
  const std::size_t n = next.size();
  std::int64_t lowest = 0;
  for (std::size_t i = 0; i < n; ++i) {
    next[i] = prev[i] - arrivals[i] + placed[i];
    lowest = std::min(lowest, next[i]);
  }
  if (lowest < 0) throw IntegrityError("in-transit inventory went negative");
}

// Arrivals R(t - l) laid out as an (N, 2, K) slab.
void gather_arrivals(const ChainConfig& config, const EnvTables& tables, int t,
                     std::span<std::int64_t> out) {
  const int n_stores = config.num_stores;
  const auto k_len = static_cast<std::size_t>(config.num_products);
  const int wh_src = t - config.warehouse_lead_time;
  for (int v = 0; v < n_stores; ++v) {
    auto wh_dst = out.subspan((static_cast<std::size_t>(v) * 2) * k_len, k_len);
    auto st_dst = out.subspan((static_cast<std::size_t>(v) * 2 + 1) * k_len, k_len);
    if (wh_src >= 0) {
      auto src = tables.accepted.lane(wh_src, v, Column::kWarehouse);
      std::copy(src.begin(), src.end(), wh_dst.begin());
    } else {
      std::fill(wh_dst.begin(), wh_dst.end(), 0);
    }
    const int st_src = t - config.store_lead_times[static_cast<std::size_t>(v)];
    if (st_src >= 0) {
      auto src = tables.accepted.lane(st_src, v, Column::kStore);
      std::copy(src.begin(), src.end(), st_dst.begin());
    } else {
      std::fill(st_dst.begin(), st_dst.end(), 0);
    }
  }
}

Money dot(std::span<const std::int64_t> qty, std::span<const Money> price) {
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < qty.size(); ++i) acc += qty[i] * price[i].micros();
  return Money::from_micros(acc);
}

constexpr std::int64_t kExactDouble = std::int64_t{1} << 53;

void resolve_allocation_into(std::span<const std::int64_t> requests, std::span<const std::int64_t> proposed,
                             std::span<const std::int64_t> warehouse_on_hand, int num_stores,
                             int num_products, std::span<std::int64_t> out,
                             std::vector<std::int64_t>& totals) {
  const auto n = static_cast<std::size_t>(num_stores);
  const auto k_len = static_cast<std::size_t>(num_products);
  for (std::size_t i = 0; i < n * k_len; ++i) out[i] = std::min(proposed[i], requests[i]);

  // totals[0, K) holds per-product sums; the tail is remainder scratch.
  totals.assign(k_len + n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    const std::int64_t* row = out.data() + v * k_len;
    for (std::size_t k = 0; k < k_len; ++k) totals[k] += row[k];
  }

  // Largest-remainder repair for over-subscribed products.
  std::int64_t* remainder = totals.data() + k_len;
  for (std::size_t k = 0; k < k_len; ++k) {
    const std::int64_t total = totals[k];
    const std::int64_t available = warehouse_on_hand[k];
    if (total <= available) continue;
    std::int64_t assigned = 0;
    for (std::size_t v = 0; v < n; ++v) {
      std::int64_t& slot = out[v * k_len + k];
      std::int64_t scaled = 0;
      if (!__builtin_mul_overflow(slot, available, &scaled) && scaled < kExactDouble && total < kExactDouble) {
        std::int64_t q = static_cast<std::int64_t>(static_cast<double>(scaled) / static_cast<double>(total));
        std::int64_t r = scaled - q * total;
        if (r < 0) {
          --q;
          r += total;
        } else if (r >= total) {
          ++q;
          r -= total;
        }
        remainder[v] = r;
        slot = q;
      } else {
        const auto wide = static_cast<__int128>(slot) * available;
        remainder[v] = static_cast<std::int64_t>(wide % total);
        slot = static_cast<std::int64_t>(wide / total);
      }
      assigned += slot;
    }
    std::int64_t leftover = available - assigned;
    // At most N - 1 units remain; each goes to the largest remainder still
    // unserved, lowest index first on ties.
    for (; leftover > 0; --leftover) {
      std::size_t best = 0;
      std::int64_t best_rem = remainder[0];
      for (std::size_t v = 1; v < n; ++v) {
        const bool better = remainder[v] > best_rem;
        best = better ? v : best;
        best_rem = better ? remainder[v] : best_rem;
      }
      out[best * k_len + k] += 1;
      remainder[best] = -1;
    }
  }
}

}  // namespace

ActionSet ActionSet::zeros(const ChainConfig& c) {
  const auto nk = static_cast<std::size_t>(c.num_stores) * c.num_products;
  return ActionSet{std::vector<std::int64_t>(nk, 0),
                   std::vector<std::int64_t>(static_cast<std::size_t>(c.num_products), 0),
                   std::vector<std::int64_t>(nk, 0)};
}

ActionSet ActionSet::full(const ChainConfig& c) {
  const auto nk = static_cast<std::size_t>(c.num_stores) * c.num_products;
  const auto top = c.max_order();
  return ActionSet{std::vector<std::int64_t>(nk, top),
                   std::vector<std::int64_t>(static_cast<std::size_t>(c.num_products), top),
                   std::vector<std::int64_t>(nk, top)};
}

void validate_actions(const ChainConfig& c, const ActionSet& a) {
  const auto nk = static_cast<std::size_t>(c.num_stores) * c.num_products;
  if (a.store_requests.size() != nk || a.warehouse_allocations.size() != nk ||
      a.warehouse_request.size() != static_cast<std::size_t>(c.num_products)) {
    throw ContractError("action arrays do not match (N, K) = (" + std::to_string(c.num_stores) + ", " +
                        std::to_string(c.num_products) + ")");
  }
  const std::int64_t top = c.max_order();
  const std::int64_t b = c.batch_size;
  const double inv_b = 1.0 / static_cast<double>(b);
  // Below 2^53, rounding q / b in double finds the only candidate multiple.
  const bool exact = top < kExactDouble;
  auto off_grid = [&](std::int64_t q) {
    if (!exact) return q % b != 0;
    return static_cast<std::int64_t>(static_cast<double>(q) * inv_b + 0.5) * b != q;
  };
  auto check = [&](const std::vector<std::int64_t>& values, const char* name) {
    for (auto q : values) {
      if (q < 0 || q > top || off_grid(q)) {
        throw ContractError(std::string(name) + " entry " + std::to_string(q) +
                            " is not on the action grid {0, b, ..., n*b}");
      }
    }
  };
  check(a.store_requests, "store_requests");
  check(a.warehouse_request, "warehouse_request");
  check(a.warehouse_allocations, "warehouse_allocations");
}

PriceBook::PriceBook(const ChainConfig& c) {
  const auto n = static_cast<std::size_t>(c.num_stores);
  const auto k_len = static_cast<std::size_t>(c.num_products);
  selling.resize(n * k_len);
  store_holding.resize(n * k_len);
  warehouse_holding.resize(k_len);
  procurement.resize(k_len);
  for (std::size_t k = 0; k < k_len; ++k) {
    for (std::size_t v = 0; v < n; ++v) {
      selling[v * k_len + k] = Money::from_double(c.selling_price[k][v]);
      store_holding[v * k_len + k] = Money::from_double(c.holding_cost[k][v + 1]);
    }
    warehouse_holding[k] = Money::from_double(c.holding_cost[k][0]);
    procurement[k] = Money::from_double(c.procurement_cost[k]);
  }
  unfulfilled = Money::from_double(c.unfulfilled_penalty_coeff);
}

std::vector<std::int64_t> resolve_sales(std::span<const std::int64_t> on_hand,
                                        std::span<const std::int64_t> demand) {
  std::vector<std::int64_t> sold(on_hand.size());
  for (std::size_t i = 0; i < sold.size(); ++i) sold[i] = std::min(demand[i], on_hand[i]);
  return sold;
}

std::vector<std::int64_t> resolve_allocation(std::span<const std::int64_t> requests,
                                             std::span<const std::int64_t> proposed,
                                             std::span<const std::int64_t> warehouse_on_hand,
                                             int num_stores, int num_products) {
  const auto nk = static_cast<std::size_t>(num_stores) * num_products;
  if (requests.size() != nk || proposed.size() != nk ||
      warehouse_on_hand.size() != static_cast<std::size_t>(num_products)) {
    throw ContractError("resolve_allocation: array sizes do not match (N, K)");
  }
  std::vector<std::int64_t> out(nk);
  std::vector<std::int64_t> totals;
  resolve_allocation_into(requests, proposed, warehouse_on_hand, num_stores, num_products, out, totals);
  return out;
}

Money sales_revenue(const PriceBook& prices, const EnvTables& tables, int t) {
  const int n = tables.sales.stores();
  const auto k_len = static_cast<std::size_t>(tables.sales.products());
  Money total;
  for (int v = 0; v < n; ++v) {
    total += dot(tables.sales.lane(t, v, Column::kStore),
                 std::span<const Money>(prices.selling).subspan(static_cast<std::size_t>(v) * k_len, k_len));
  }
  return total;
}

Money holding_cost(const PriceBook& prices, const EnvTables& tables, int t) {
  const int n = tables.on_hand.stores();
  const auto k_len = static_cast<std::size_t>(tables.on_hand.products());
  Money total = dot(tables.on_hand.lane(t + 1, 0, Column::kWarehouse), prices.warehouse_holding);
  for (int v = 0; v < n; ++v) {
    total += dot(tables.on_hand.lane(t + 1, v, Column::kStore),
                 std::span<const Money>(prices.store_holding).subspan(static_cast<std::size_t>(v) * k_len, k_len));
  }
  return total;
}

Money procurement_cost(const ChainConfig& config, const PriceBook& prices, const EnvTables& tables, int t) {
  const int src = t - config.warehouse_lead_time;
  if (src < 0) return Money{};
  return dot(tables.accepted.lane(src, 0, Column::kWarehouse), prices.procurement);
}

Money unfulfilled_penalty(const PriceBook& prices, const EnvTables& tables, int t) {
  const int n = tables.requested.stores();
  const auto k_len = static_cast<std::size_t>(tables.requested.products());
  std::int64_t units = 0;
  auto wh = tables.on_hand.lane(t, 0, Column::kWarehouse);
  for (std::size_t k = 0; k < k_len; ++k) {
    std::int64_t asked = 0;
    for (int v = 0; v < n; ++v) asked += tables.requested.at(t, v, Column::kStore, static_cast<int>(k));
    units += std::max<std::int64_t>(0, asked - wh[k]);
  }
  auto demand = tables.demand.slab(t);
  for (int v = 0; v < n; ++v) {
    auto sold = tables.sales.lane(t, v, Column::kStore);
    const std::int64_t* wanted = demand.data() + static_cast<std::size_t>(v) * k_len;
    for (std::size_t k = 0; k < k_len; ++k) units += wanted[k] - sold[k];
  }
  return prices.unfulfilled * units;
}

Money shared_reward(const RewardComponents& c) {
  return c.sales_revenue - (c.procurement_cost + c.holding_cost + c.unfulfilled_penalty);
}

RewardComponents reward_components(const ChainConfig& config, const PriceBook& prices,
                                   const EnvTables& tables, int t) {
  return RewardComponents{sales_revenue(prices, tables, t), holding_cost(prices, tables, t),
                          procurement_cost(config, prices, tables, t),
                          unfulfilled_penalty(prices, tables, t)};
}

std::vector<Money> local_rewards(const ChainConfig& config, const PriceBook& prices,
                                 const EnvTables& tables, int t) {
  const int n = config.num_stores;
  const auto k_len = static_cast<std::size_t>(config.num_products);
  std::vector<Money> out(static_cast<std::size_t>(n) + 1);

  std::int64_t shortfall = 0;
  auto wh = tables.on_hand.lane(t, 0, Column::kWarehouse);
  for (std::size_t k = 0; k < k_len; ++k) {
    std::int64_t asked = 0;
    for (int v = 0; v < n; ++v) asked += tables.requested.at(t, v, Column::kStore, static_cast<int>(k));
    shortfall += std::max<std::int64_t>(0, asked - wh[k]);
  }
  out[0] = -(procurement_cost(config, prices, tables, t) +
             dot(tables.on_hand.lane(t + 1, 0, Column::kWarehouse), prices.warehouse_holding) +
             prices.unfulfilled * shortfall);

  auto demand = tables.demand.slab(t);
  for (int v = 0; v < n; ++v) {
    const auto off = static_cast<std::size_t>(v) * k_len;
    auto sold = tables.sales.lane(t, v, Column::kStore);
    std::int64_t lost = 0;
    for (std::size_t k = 0; k < k_len; ++k) lost += demand[off + k] - sold[k];
    out[static_cast<std::size_t>(v) + 1] =
        dot(sold, std::span<const Money>(prices.selling).subspan(off, k_len)) -
        dot(tables.on_hand.lane(t + 1, v, Column::kStore),
            std::span<const Money>(prices.store_holding).subspan(off, k_len)) -
        prices.unfulfilled * lost;
  }
  return out;
}

std::vector<Money> product_rewards(const ChainConfig& config, const PriceBook& prices,
                                   const EnvTables& tables, int t) {
  const int n = config.num_stores;
  const int k_len = config.num_products;
  std::vector<Money> out(static_cast<std::size_t>(k_len));
  const int src = t - config.warehouse_lead_time;
  for (int k = 0; k < k_len; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    Money r = -(tables.on_hand.at(t + 1, 0, Column::kWarehouse, k) * prices.warehouse_holding[ku]);
    if (src >= 0) r -= tables.accepted.at(src, 0, Column::kWarehouse, k) * prices.procurement[ku];
    std::int64_t asked = 0;
    std::int64_t lost = 0;
    for (int v = 0; v < n; ++v) {
      const std::size_t idx = static_cast<std::size_t>(v) * static_cast<std::size_t>(k_len) + ku;
      const std::int64_t sold = tables.sales.at(t, v, Column::kStore, k);
      r += sold * prices.selling[idx];
      r -= tables.on_hand.at(t + 1, v, Column::kStore, k) * prices.store_holding[idx];
      asked += tables.requested.at(t, v, Column::kStore, k);
      lost += tables.demand.at(t, v, k) - sold;
    }
    lost += std::max<std::int64_t>(0, asked - tables.on_hand.at(t, 0, Column::kWarehouse, k));
    out[ku] = r - prices.unfulfilled * lost;
  }
  return out;
}

void update_in_transit(const ChainConfig& config, EnvTables& tables, int t) {
  std::vector<std::int64_t> arrivals(tables.in_transit.slab_size());
  gather_arrivals(config, tables, t, arrivals);
  advance_in_transit(tables.in_transit.slab(t), arrivals, tables.accepted.slab(t), tables.in_transit.slab(t + 1));
}

Env::Env(ChainConfig config, std::uint64_t seed) : rng_(seed) {
  resolve_and_validate(config);
  state_.config = std::move(config);
  prices_ = PriceBook(state_.config);
  const auto& c = state_.config;
  const auto n = static_cast<std::size_t>(c.num_stores);
  const auto k_len = static_cast<std::size_t>(c.num_products);
  demand_dists_.reserve(n * k_len);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t k = 0; k < k_len; ++k) {
      const double mu = c.demand_mean[v][k];
      demand_dists_.emplace_back(mu > 0.0 ? mu : 1.0);
    }
  }
  state_.tables = EnvTables(c.horizon, c.num_stores, c.num_products);
  accepted_.resize(n * k_len);
  shipped_.resize(k_len);
  asked_.resize(k_len);
  reset();
}

void Env::clear_tables() {
  auto& tb = state_.tables;
  tb.on_hand.fill(0);
  tb.in_transit.fill(0);
  tb.requested.fill(0);
  tb.accepted.fill(0);
  tb.demand.fill(0);
  tb.sales.fill(0);
  std::fill(tb.reward.begin(), tb.reward.end(), Money{});
  tb.clock = 0;
  const auto& c = state_.config;
  for (int v = 0; v < c.num_stores; ++v) {
    for (int k = 0; k < c.num_products; ++k) {
      tb.on_hand.at(0, v, Column::kWarehouse, k) = c.initial_inventory[0][static_cast<std::size_t>(k)];
      tb.on_hand.at(0, v, Column::kStore, k) =
          c.initial_inventory[static_cast<std::size_t>(v) + 1][static_cast<std::size_t>(k)];
    }
  }
}

void Env::reset() {
  clear_tables();
  for (int t = 0; t < state_.config.horizon; ++t) sample_demand(t);
}

void Env::reset(std::uint64_t seed) {
  rng_.seed(seed);
  for (auto& dist : demand_dists_) dist.reset();
  reset();
}

std::span<const std::int64_t> Env::sample_demand(int t) {
  if (t < 0 || t >= state_.config.horizon) throw ContractError("sample_demand: period out of range");
  auto out = state_.tables.demand.slab(t);
  const auto n = static_cast<std::size_t>(state_.config.num_stores);
  const auto k_len = static_cast<std::size_t>(state_.config.num_products);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t k = 0; k < k_len; ++k) {
      const std::size_t i = v * k_len + k;
      out[i] = state_.config.demand_mean[v][k] > 0.0 ? demand_dists_[i](rng_) : 0;
    }
  }
  return out;
}

void Env::replay_demand(int t, std::span<const std::int64_t> demand) {
  if (t < 0 || t >= state_.config.horizon) throw ContractError("replay_demand: period out of range");
  auto out = state_.tables.demand.slab(t);
  if (demand.size() != out.size()) throw ContractError("replay_demand: slab must be (N, K)");
  for (auto d : demand) {
    if (d < 0) throw ContractError("replay_demand: demand must be non-negative");
  }
  std::copy(demand.begin(), demand.end(), out.begin());
}

StepOutcome Env::step(const ActionSet& actions) {
  if (done()) throw EpisodeComplete();
  const auto& c = state_.config;
  validate_actions(c, actions);
  auto& tb = state_.tables;
  const int t = tb.clock;
  const int n = c.num_stores;
  const auto k_len = static_cast<std::size_t>(c.num_products);

  // Sales against period-start store stock.
  auto demand = tb.demand.slab(t);
  for (int v = 0; v < n; ++v) {
    const auto off = static_cast<std::size_t>(v) * k_len;
    auto x = tb.on_hand.lane(t, v, Column::kStore);
    auto s = tb.sales.lane(t, v, Column::kStore);
    for (std::size_t k = 0; k < k_len; ++k) s[k] = std::min(demand[off + k], x[k]);
  }

  // Allocation from period-start warehouse stock; supplier accepts everything.
  resolve_allocation_into(actions.store_requests, actions.warehouse_allocations,
                          tb.on_hand.lane(t, 0, Column::kWarehouse), n, c.num_products, accepted_, scratch_);
  std::fill(shipped_.begin(), shipped_.end(), 0);
  std::fill(asked_.begin(), asked_.end(), 0);
  for (int v = 0; v < n; ++v) {
    const auto off = static_cast<std::size_t>(v) * k_len;
    const auto req = std::span<const std::int64_t>(actions.store_requests).subspan(off, k_len);
    const auto acc = std::span<const std::int64_t>(accepted_).subspan(off, k_len);
    std::copy(req.begin(), req.end(), tb.requested.lane(t, v, Column::kStore).begin());
    std::copy(actions.warehouse_request.begin(), actions.warehouse_request.end(),
              tb.requested.lane(t, v, Column::kWarehouse).begin());
    std::copy(acc.begin(), acc.end(), tb.accepted.lane(t, v, Column::kStore).begin());
    std::copy(actions.warehouse_request.begin(), actions.warehouse_request.end(),
              tb.accepted.lane(t, v, Column::kWarehouse).begin());
    std::copy(acc.begin(), acc.end(), tb.sales.lane(t, v, Column::kWarehouse).begin());
    for (std::size_t k = 0; k < k_len; ++k) {
      shipped_[k] += acc[k];
      asked_[k] += req[k];
    }
  }

  // Inventory with shelf-capacity clamp and in-transit, one pass per lane.
  // Warehouse column: outflow is total shipments; store column: outflow is sales.
  std::int64_t lowest = 0;
  auto update_lane = [&](int v, Column col, int lead, const std::int64_t* outflow, const std::int64_t* cap) {
    const int src = t - lead;
    const std::int64_t* arrive = src >= 0 ? tb.accepted.lane(src, v, col).data() : nullptr;
    const std::int64_t* x_now = tb.on_hand.lane(t, v, col).data();
    std::int64_t* x_next = tb.on_hand.lane(t + 1, v, col).data();
    const std::int64_t* pipe_now = tb.in_transit.lane(t, v, col).data();
    std::int64_t* pipe_next = tb.in_transit.lane(t + 1, v, col).data();
    const std::int64_t* placed = tb.accepted.lane(t, v, col).data();
    for (std::size_t k = 0; k < k_len; ++k) {
      const std::int64_t in = arrive ? arrive[k] : 0;
      x_next[k] = std::min(cap[k], x_now[k] - outflow[k] + in);
      pipe_next[k] = pipe_now[k] - in + placed[k];
      lowest = std::min(lowest, pipe_next[k]);
    }
  };
  for (int v = 0; v < n; ++v) {
    update_lane(v, Column::kWarehouse, c.warehouse_lead_time, shipped_.data(), c.warehouse_capacity.data());
    update_lane(v, Column::kStore, c.store_lead_times[static_cast<std::size_t>(v)],
                tb.sales.lane(t, v, Column::kStore).data(), c.store_capacity[static_cast<std::size_t>(v)].data());
  }
  if (lowest < 0) throw IntegrityError("in-transit inventory went negative");

  // Rewards in one pass per lane; equal to reward_components + local_rewards.
  StepOutcome out;
  out.local_rewards.resize(static_cast<std::size_t>(n) + 1);
  auto wh_start = tb.on_hand.lane(t, 0, Column::kWarehouse);
  std::int64_t shortfall = 0;
  for (std::size_t k = 0; k < k_len; ++k) shortfall += std::max<std::int64_t>(0, asked_[k] - wh_start[k]);
  const Money wh_hold = dot(tb.on_hand.lane(t + 1, 0, Column::kWarehouse), prices_.warehouse_holding);
  const Money bought = procurement_cost(c, prices_, tb, t);
  out.local_rewards[0] = -(bought + wh_hold + prices_.unfulfilled * shortfall);
  std::int64_t revenue = 0;
  std::int64_t holding = wh_hold.micros();
  std::int64_t lost_total = shortfall;
  for (int v = 0; v < n; ++v) {
    const auto off = static_cast<std::size_t>(v) * k_len;
    const std::int64_t* sold = tb.sales.lane(t, v, Column::kStore).data();
    const std::int64_t* stock = tb.on_hand.lane(t + 1, v, Column::kStore).data();
    const std::int64_t* wanted = demand.data() + off;
    const Money* price = prices_.selling.data() + off;
    const Money* hold = prices_.store_holding.data() + off;
    std::int64_t rev_v = 0;
    std::int64_t hold_v = 0;
    std::int64_t lost_v = 0;
    for (std::size_t k = 0; k < k_len; ++k) {
      rev_v += sold[k] * price[k].micros();
      hold_v += stock[k] * hold[k].micros();
      lost_v += wanted[k] - sold[k];
    }
    revenue += rev_v;
    holding += hold_v;
    lost_total += lost_v;
    out.local_rewards[static_cast<std::size_t>(v) + 1] =
        Money::from_micros(rev_v - hold_v) - prices_.unfulfilled * lost_v;
  }
  out.components = RewardComponents{Money::from_micros(revenue), Money::from_micros(holding), bought,
                                    prices_.unfulfilled * lost_total};
  out.shared_reward = shared_reward(out.components);
  tb.reward[static_cast<std::size_t>(t)] = out.shared_reward;
  tb.clock = t + 1;
  out.done = tb.clock >= c.horizon;
  return out;
}

Env create_env(ChainConfig config, std::uint64_t seed) { return Env(std::move(config), seed); }

}  // namespace echelon
