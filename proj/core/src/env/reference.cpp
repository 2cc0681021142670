#include "echelon/env/reference.hpp"

#include <algorithm>

namespace echelon {
namespace {

std::int64_t accepted_at(const EnvTables& tb, int t, int v, Column c, int k) {
  return t < 0 ? 0 : tb.accepted.at(t, v, c, k);
}

}  // namespace

StepOutcome scalar_reference_step(EnvState& state, const ActionSet& actions) {
  const ChainConfig& c = state.config;
  EnvTables& tb = state.tables;
  if (tb.clock >= c.horizon) throw EpisodeComplete();
  validate_actions(c, actions);

  const int t = tb.clock;
  const int n = c.num_stores;
  const int k_len = c.num_products;
  const Money theta_u = Money::from_double(c.unfulfilled_penalty_coeff);

  auto flat = [k_len](int v, int k) { return static_cast<std::size_t>(v) * static_cast<std::size_t>(k_len) + static_cast<std::size_t>(k); };

  // Sales.
  for (int v = 0; v < n; ++v) {
    for (int k = 0; k < k_len; ++k) {
      const std::int64_t x = tb.on_hand.at(t, v, Column::kStore, k);
      const std::int64_t d = tb.demand.at(t, v, k);
      tb.sales.at(t, v, Column::kStore, k) = d < x ? d : x;
    }
  }

  // Allocation, one product at a time.
  for (int k = 0; k < k_len; ++k) {
    const std::int64_t stock = tb.on_hand.at(t, 0, Column::kWarehouse, k);
    std::vector<std::int64_t> capped(static_cast<std::size_t>(n));
    std::int64_t total = 0;
    for (int v = 0; v < n; ++v) {
      const std::int64_t want = actions.store_requests[flat(v, k)];
      const std::int64_t offer = actions.warehouse_allocations[flat(v, k)];
      capped[static_cast<std::size_t>(v)] = offer < want ? offer : want;
      total += capped[static_cast<std::size_t>(v)];
    }
    if (total > stock) {
      // Largest remainder: exact shares stock * capped / total.
      std::vector<std::int64_t> rem(static_cast<std::size_t>(n));
      std::int64_t given = 0;
      for (int v = 0; v < n; ++v) {
        const auto num = static_cast<__int128>(capped[static_cast<std::size_t>(v)]) * stock;
        capped[static_cast<std::size_t>(v)] = static_cast<std::int64_t>(num / total);
        rem[static_cast<std::size_t>(v)] = static_cast<std::int64_t>(num % total);
        given += capped[static_cast<std::size_t>(v)];
      }
      for (std::int64_t left = stock - given; left > 0; --left) {
        int best = -1;
        for (int v = 0; v < n; ++v) {
          if (rem[static_cast<std::size_t>(v)] > 0 &&
              (best < 0 || rem[static_cast<std::size_t>(v)] > rem[static_cast<std::size_t>(best)])) {
            best = v;
          }
        }
        capped[static_cast<std::size_t>(best)] += 1;
        rem[static_cast<std::size_t>(best)] = 0;
      }
    }
    for (int v = 0; v < n; ++v) {
      const std::int64_t r = capped[static_cast<std::size_t>(v)];
      tb.requested.at(t, v, Column::kStore, k) = actions.store_requests[flat(v, k)];
      tb.requested.at(t, v, Column::kWarehouse, k) = actions.warehouse_request[static_cast<std::size_t>(k)];
      tb.accepted.at(t, v, Column::kStore, k) = r;
      tb.accepted.at(t, v, Column::kWarehouse, k) = actions.warehouse_request[static_cast<std::size_t>(k)];
      tb.sales.at(t, v, Column::kWarehouse, k) = r;
    }
  }

  // Inventory and in-transit, per row and column.
  for (int v = 0; v < n; ++v) {
    const int lv = c.store_lead_times[static_cast<std::size_t>(v)];
    const int lw = c.warehouse_lead_time;
    for (int k = 0; k < k_len; ++k) {
      std::int64_t shipped = 0;
      for (int u = 0; u < n; ++u) shipped += tb.accepted.at(t, u, Column::kStore, k);

      const std::int64_t wh = tb.on_hand.at(t, v, Column::kWarehouse, k) - shipped +
                              accepted_at(tb, t - lw, v, Column::kWarehouse, k);
      const std::int64_t wh_cap = c.warehouse_capacity[static_cast<std::size_t>(k)];
      tb.on_hand.at(t + 1, v, Column::kWarehouse, k) = wh > wh_cap ? wh_cap : wh;

      const std::int64_t st = tb.on_hand.at(t, v, Column::kStore, k) - tb.sales.at(t, v, Column::kStore, k) +
                              accepted_at(tb, t - lv, v, Column::kStore, k);
      const std::int64_t st_cap = c.store_capacity[static_cast<std::size_t>(v)][static_cast<std::size_t>(k)];
      tb.on_hand.at(t + 1, v, Column::kStore, k) = st > st_cap ? st_cap : st;

      std::int64_t wh_transit = 0;
      for (int i = 0; i < lw; ++i) wh_transit += accepted_at(tb, t - i, v, Column::kWarehouse, k);
      std::int64_t st_transit = 0;
      for (int i = 0; i < lv; ++i) st_transit += accepted_at(tb, t - i, v, Column::kStore, k);
      if (wh_transit < 0 || st_transit < 0) throw IntegrityError("in-transit inventory went negative");
      tb.in_transit.at(t + 1, v, Column::kWarehouse, k) = wh_transit;
      tb.in_transit.at(t + 1, v, Column::kStore, k) = st_transit;
    }
  }

  // Rewards.
  StepOutcome out;
  out.local_rewards.assign(static_cast<std::size_t>(n) + 1, Money{});
  for (int k = 0; k < k_len; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Money wh_hold = Money::from_double(c.holding_cost[ku][0]);
    const Money proc = Money::from_double(c.procurement_cost[ku]);

    const Money hold_wh = wh_hold * tb.on_hand.at(t + 1, 0, Column::kWarehouse, k);
    const Money bought = proc * accepted_at(tb, t - c.warehouse_lead_time, 0, Column::kWarehouse, k);
    std::int64_t asked = 0;
    for (int v = 0; v < n; ++v) asked += tb.requested.at(t, v, Column::kStore, k);
    const std::int64_t gap = asked - tb.on_hand.at(t, 0, Column::kWarehouse, k);
    const Money short_wh = theta_u * (gap > 0 ? gap : 0);

    out.components.holding_cost += hold_wh;
    out.components.procurement_cost += bought;
    out.components.unfulfilled_penalty += short_wh;
    out.local_rewards[0] -= hold_wh + bought + short_wh;

    for (int v = 0; v < n; ++v) {
      const auto vu = static_cast<std::size_t>(v);
      const std::int64_t sold = tb.sales.at(t, v, Column::kStore, k);
      const Money revenue = Money::from_double(c.selling_price[ku][vu]) * sold;
      const Money hold = Money::from_double(c.holding_cost[ku][vu + 1]) * tb.on_hand.at(t + 1, v, Column::kStore, k);
      const Money lost = theta_u * (tb.demand.at(t, v, k) - sold);
      out.components.sales_revenue += revenue;
      out.components.holding_cost += hold;
      out.components.unfulfilled_penalty += lost;
      out.local_rewards[vu + 1] += revenue - hold - lost;
    }
  }
  out.shared_reward = out.components.sales_revenue -
                      (out.components.procurement_cost + out.components.holding_cost +
                       out.components.unfulfilled_penalty);
  tb.reward[static_cast<std::size_t>(t)] = out.shared_reward;
  tb.clock = t + 1;
  out.done = tb.clock >= c.horizon;
  return out;
}

}  // namespace echelon
