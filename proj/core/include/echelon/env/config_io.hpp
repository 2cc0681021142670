#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "echelon/env/config.hpp"

namespace echelon {

// Chain configuration files are YAML mappings whose keys are exactly the
// ChainConfig field names. Array fields accept either a scalar, broadcast to
// the full shape, or nested lists of the exact shape. history_len and
// batch_size may be omitted to take their derived defaults. Unknown keys are
// rejected.

ChainConfig parse_chain_config(const std::string& text);
ChainConfig load_chain_config(const std::filesystem::path& path);

// Fully expanded, resolved form; parse_chain_config(render(c)) == c.
std::string render_chain_config(const ChainConfig& config);

// Applies dotted KEY=VALUE overrides (e.g. "demand_mean.0.0=12") to the
// resolved form of `config` and re-validates.
ChainConfig apply_overrides(const ChainConfig& config, const std::vector<std::string>& overrides);

}  // namespace echelon
