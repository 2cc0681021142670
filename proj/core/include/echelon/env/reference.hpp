#pragma once

#include "echelon/env/env.hpp"

namespace echelon {

// Element-by-element restatement of Env::step over (v, k) nested loops.
//
// Shares no kernels with the table-slab path: prices are read straight from
// the config, in-transit stock is recomputed from its definition as the sum
// of in-flight accepted orders, and the allocation repair is redone per
// product. Intended as a test oracle only.
StepOutcome scalar_reference_step(EnvState& state, const ActionSet& actions);

}  // namespace echelon
