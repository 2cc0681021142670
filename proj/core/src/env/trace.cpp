#include "echelon/env/trace.hpp"

#include "echelon/format.hpp"

namespace echelon {

void write_trace_csv(std::ostream& out, const EnvState& state) {
  const auto& c = state.config;
  const auto& tb = state.tables;
  out << kTraceHeader << '\n';
  for (int t = 0; t < tb.clock; ++t) {
    const std::string reward = format_real(tb.reward[static_cast<std::size_t>(t)].to_double());
    for (int k = 0; k < c.num_products; ++k) {
      std::int64_t asked = 0;
      std::int64_t shipped = 0;
      for (int v = 0; v < c.num_stores; ++v) {
        asked += tb.requested.at(t, v, Column::kStore, k);
        shipped += tb.accepted.at(t, v, Column::kStore, k);
      }
      out << t << ",0," << k << ',' << tb.on_hand.at(t, 0, Column::kWarehouse, k) << ','
          << tb.in_transit.at(t, 0, Column::kWarehouse, k) << ','
          << tb.requested.at(t, 0, Column::kWarehouse, k) << ','
          << tb.accepted.at(t, 0, Column::kWarehouse, k) << ',' << asked << ',' << shipped << ','
          << reward << '\n';
    }
    for (int v = 0; v < c.num_stores; ++v) {
      for (int k = 0; k < c.num_products; ++k) {
        out << t << ',' << v + 1 << ',' << k << ',' << tb.on_hand.at(t, v, Column::kStore, k) << ','
            << tb.in_transit.at(t, v, Column::kStore, k) << ',' << tb.requested.at(t, v, Column::kStore, k)
            << ',' << tb.accepted.at(t, v, Column::kStore, k) << ',' << tb.demand.at(t, v, k) << ','
            << tb.sales.at(t, v, Column::kStore, k) << ',' << reward << '\n';
      }
    }
  }
}

void write_inventory_summary_csv(std::ostream& out, const EnvState& state) {
  const auto& c = state.config;
  const auto& tb = state.tables;
  out << "t,product,warehouse_on_hand,store_mean_on_hand\n";
  for (int t = 0; t < tb.clock; ++t) {
    for (int k = 0; k < c.num_products; ++k) {
      std::int64_t total = 0;
      for (int v = 0; v < c.num_stores; ++v) total += tb.on_hand.at(t, v, Column::kStore, k);
      out << t << ',' << k << ',' << tb.on_hand.at(t, 0, Column::kWarehouse, k) << ','
          << format_real(static_cast<double>(total) / c.num_stores) << '\n';
    }
  }
}

}  // namespace echelon
