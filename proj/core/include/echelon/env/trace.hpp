#pragma once

#include <ostream>

#include "echelon/env/env.hpp"

namespace echelon {

inline constexpr const char* kTraceHeader =
    "t,vertex,product,on_hand,in_transit,requested,accepted,demand,sales,reward_shared";

// One row per completed period t, vertex (0 = warehouse, v + 1 = store v) and
// product. Warehouse rows report store requests received as demand and units
// shipped to stores as sales.
void write_trace_csv(std::ostream& out, const EnvState& state);

// Per period and product: warehouse on-hand and the mean store on-hand.
void write_inventory_summary_csv(std::ostream& out, const EnvState& state);

}  // namespace echelon
