#include "echelon/env/config_io.hpp"

#include <fstream>
#include <sstream>

#include "../yaml_support.hpp"

namespace echelon {
namespace detail {

const std::set<std::string>& chain_keys() {
  static const std::set<std::string> keys = {
      "num_stores",     "num_products",     "horizon",         "store_lead_times",
      "warehouse_lead_time", "history_len", "store_capacity",  "warehouse_capacity",
      "selling_price",  "holding_cost",     "procurement_cost", "unfulfilled_penalty_coeff",
      "demand_mean",    "action_levels",    "batch_size",      "initial_inventory"};
  return keys;
}

ChainConfig chain_from_node(const YAML::Node& root, const std::string& prefix) {
  auto path = [&](const char* key) { return join_path(prefix, key); };
  auto required = [&](const char* key) {
    const YAML::Node node = root[key];
    if (!node) throw ConfigError(path(key), "missing required key");
    return node;
  };

  ChainConfig c;
  c.num_stores = scalar_as<int>(required("num_stores"), path("num_stores"));
  c.num_products = scalar_as<int>(required("num_products"), path("num_products"));
  if (c.num_stores < 1) throw ConfigError(path("num_stores"), "must be >= 1");
  if (c.num_products < 1) throw ConfigError(path("num_products"), "must be >= 1");
  const auto n = static_cast<std::size_t>(c.num_stores);
  const auto k = static_cast<std::size_t>(c.num_products);

  c.horizon = root["horizon"] ? scalar_as<int>(root["horizon"], path("horizon")) : 30;
  c.store_lead_times = vector_as<int>(required("store_lead_times"), n, path("store_lead_times"));
  c.warehouse_lead_time = scalar_as<int>(required("warehouse_lead_time"), path("warehouse_lead_time"));
  c.history_len = root["history_len"] ? scalar_as<int>(root["history_len"], path("history_len")) : 0;
  c.store_capacity = matrix_as<std::int64_t>(required("store_capacity"), n, k, path("store_capacity"));
  c.warehouse_capacity = vector_as<std::int64_t>(required("warehouse_capacity"), k, path("warehouse_capacity"));
  c.selling_price = matrix_as<double>(required("selling_price"), k, n, path("selling_price"));
  c.holding_cost = matrix_as<double>(required("holding_cost"), k, n + 1, path("holding_cost"));
  c.procurement_cost = vector_as<double>(required("procurement_cost"), k, path("procurement_cost"));
  c.unfulfilled_penalty_coeff =
      scalar_as<double>(required("unfulfilled_penalty_coeff"), path("unfulfilled_penalty_coeff"));
  c.demand_mean = matrix_as<double>(required("demand_mean"), n, k, path("demand_mean"));
  c.action_levels = root["action_levels"] ? scalar_as<int>(root["action_levels"], path("action_levels")) : 20;
  c.batch_size = root["batch_size"] ? scalar_as<int>(root["batch_size"], path("batch_size")) : 0;
  c.initial_inventory =
      matrix_as<std::int64_t>(required("initial_inventory"), n + 1, k, path("initial_inventory"));

  try {
    resolve_and_validate(c);
  } catch (const ConfigError& e) {
    if (prefix.empty()) throw;
    throw ConfigError(join_path(prefix, e.field()), e.what());
  }
  return c;
}

void chain_into_node(const ChainConfig& c, YAML::Node& root) {
  root["num_stores"] = c.num_stores;
  root["num_products"] = c.num_products;
  root["horizon"] = c.horizon;
  root["store_lead_times"] = list_node(c.store_lead_times);
  root["warehouse_lead_time"] = c.warehouse_lead_time;
  root["history_len"] = c.history_len;
  root["store_capacity"] = matrix_node(c.store_capacity);
  root["warehouse_capacity"] = list_node(c.warehouse_capacity);
  root["selling_price"] = matrix_node(c.selling_price);
  root["holding_cost"] = matrix_node(c.holding_cost);
  root["procurement_cost"] = list_node(c.procurement_cost);
  root["unfulfilled_penalty_coeff"] = real_node(c.unfulfilled_penalty_coeff);
  root["demand_mean"] = matrix_node(c.demand_mean);
  root["action_levels"] = c.action_levels;
  root["batch_size"] = c.batch_size;
  root["initial_inventory"] = matrix_node(c.initial_inventory);
}

void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must have the form KEY=VALUE");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  YAML::Node cursor;
  cursor.reset(root);
  std::stringstream segments(key);
  std::string segment;
  std::string walked;
  while (std::getline(segments, segment, '.')) {
    walked = join_path(walked, segment);
    if (cursor.IsMap()) {
      if (!cursor[segment]) throw ConfigError(walked, "unknown configuration key");
      YAML::Node next = cursor[segment];
      cursor.reset(next);
    } else if (cursor.IsSequence()) {
      std::size_t index = 0;
      try {
        std::size_t used = 0;
        index = std::stoul(segment, &used);
        if (used != segment.size()) throw std::invalid_argument(segment);
      } catch (const std::exception&) {
        throw ConfigError(walked, "expected a list index");
      }
      if (index >= cursor.size()) throw ConfigError(walked, "list index out of range");
      YAML::Node next = cursor[index];
      cursor.reset(next);
    } else {
      throw ConfigError(walked, "cannot descend into a scalar");
    }
  }
  YAML::Node value;
  try {
    value = YAML::Load(text);
  } catch (const YAML::Exception&) {
    throw ConfigError(key, "malformed value '" + text + "'");
  }
  if (!value || value.IsNull()) throw ConfigError(key, "missing value");
  cursor = value;
}

YAML::Node parse_document(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("", std::string("malformed configuration: ") + e.what());
  }
  if (!root || root.IsNull()) return YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("", "configuration must be a mapping");
  return root;
}

std::string emit_document(const YAML::Node& root) {
  YAML::Emitter out;
  out << root;
  return std::string(out.c_str()) + "\n";
}

}  // namespace detail

ChainConfig parse_chain_config(const std::string& text) {
  const YAML::Node root = detail::parse_document(text);
  detail::reject_unknown_keys(root, detail::chain_keys(), "");
  return detail::chain_from_node(root, "");
}

ChainConfig load_chain_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open configuration file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_chain_config(buffer.str());
}

std::string render_chain_config(const ChainConfig& config) {
  YAML::Node root(YAML::NodeType::Map);
  detail::chain_into_node(config, root);
  return detail::emit_document(root);
}

ChainConfig apply_overrides(const ChainConfig& config, const std::vector<std::string>& overrides) {
  YAML::Node root(YAML::NodeType::Map);
  detail::chain_into_node(config, root);
  for (const auto& o : overrides) detail::apply_override(root, o);
  return detail::chain_from_node(root, "");
}

}  // namespace echelon
