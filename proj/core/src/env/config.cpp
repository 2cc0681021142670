#include "echelon/env/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace echelon {
namespace {

template <typename T>
void require_size(const std::vector<T>& values, std::size_t expected, const std::string& field) {
  if (values.size() != expected) {
    throw ConfigError(field, "expected " + std::to_string(expected) + " entries, got " +
                                 std::to_string(values.size()));
  }
}

template <typename T>
void require_shape(const std::vector<std::vector<T>>& values, std::size_t rows, std::size_t cols,
                   const std::string& field) {
  require_size(values, rows, field);
  for (std::size_t i = 0; i < rows; ++i) {
    require_size(values[i], cols, field + "." + std::to_string(i));
  }
}

void require_positive_price(double value, const std::string& field) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw ConfigError(field, "must be finite and strictly positive, got " + std::to_string(value));
  }
  Money::from_double(value);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
std::uint64_t mix(std::uint64_t h, T value) {
  return fnv1a(h, &value, sizeof(value));
}

}  // namespace

int ChainConfig::max_lead_time() const {
  int m = warehouse_lead_time;
  for (int l : store_lead_times) m = std::max(m, l);
  return m;
}

bool ChainConfig::uses_default_demand_range() const {
  for (const auto& row : demand_mean) {
    for (double mu : row) {
      if (mu < 10.0 || mu > 1000.0) return false;
    }
  }
  return true;
}

void resolve_and_validate(ChainConfig& c) {
  if (c.num_stores < 1) throw ConfigError("num_stores", "must be >= 1");
  if (c.num_products < 1) throw ConfigError("num_products", "must be >= 1");
  if (c.horizon < 1) throw ConfigError("horizon", "must be >= 1");

  const auto n_stores = static_cast<std::size_t>(c.num_stores);
  const auto n_products = static_cast<std::size_t>(c.num_products);

  require_size(c.store_lead_times, n_stores, "store_lead_times");
  for (std::size_t v = 0; v < n_stores; ++v) {
    if (c.store_lead_times[v] < 1) {
      throw ConfigError("store_lead_times." + std::to_string(v), "lead time must be >= 1");
    }
  }
  if (c.warehouse_lead_time < 1) throw ConfigError("warehouse_lead_time", "lead time must be >= 1");

  if (c.history_len == 0) c.history_len = c.max_lead_time();
  if (c.history_len < c.max_lead_time()) {
    throw ConfigError("history_len", "must be >= the largest lead time (" +
                                         std::to_string(c.max_lead_time()) + ")");
  }

  require_shape(c.store_capacity, n_stores, n_products, "store_capacity");
  for (std::size_t v = 0; v < n_stores; ++v) {
    for (std::size_t k = 0; k < n_products; ++k) {
      if (c.store_capacity[v][k] <= 0) {
        throw ConfigError("store_capacity." + std::to_string(v) + "." + std::to_string(k),
                          "capacity must be > 0");
      }
    }
  }
  require_size(c.warehouse_capacity, n_products, "warehouse_capacity");
  for (std::size_t k = 0; k < n_products; ++k) {
    if (c.warehouse_capacity[k] <= 0) {
      throw ConfigError("warehouse_capacity." + std::to_string(k), "capacity must be > 0");
    }
  }

  require_shape(c.selling_price, n_products, n_stores, "selling_price");
  require_shape(c.holding_cost, n_products, n_stores + 1, "holding_cost");
  require_size(c.procurement_cost, n_products, "procurement_cost");
  for (std::size_t k = 0; k < n_products; ++k) {
    const std::string ks = std::to_string(k);
    for (std::size_t v = 0; v < n_stores; ++v) {
      require_positive_price(c.selling_price[k][v], "selling_price." + ks + "." + std::to_string(v));
    }
    for (std::size_t w = 0; w <= n_stores; ++w) {
      require_positive_price(c.holding_cost[k][w], "holding_cost." + ks + "." + std::to_string(w));
    }
    require_positive_price(c.procurement_cost[k], "procurement_cost." + ks);
  }
  if (!std::isfinite(c.unfulfilled_penalty_coeff) || c.unfulfilled_penalty_coeff < 0.0) {
    throw ConfigError("unfulfilled_penalty_coeff", "must be finite and >= 0");
  }
  Money::from_double(c.unfulfilled_penalty_coeff);

  require_shape(c.demand_mean, n_stores, n_products, "demand_mean");
  for (std::size_t v = 0; v < n_stores; ++v) {
    for (std::size_t k = 0; k < n_products; ++k) {
      const double mu = c.demand_mean[v][k];
      if (!std::isfinite(mu) || mu < 0.0) {
        throw ConfigError("demand_mean." + std::to_string(v) + "." + std::to_string(k),
                          "Poisson mean must be finite and >= 0, got " + std::to_string(mu));
      }
    }
  }

  if (c.action_levels < 0) throw ConfigError("action_levels", "must be >= 0");
  if (c.batch_size == 0) {
    std::int64_t max_cap = 0;
    for (const auto& row : c.store_capacity) {
      for (auto cap : row) max_cap = std::max(max_cap, cap);
    }
    for (auto cap : c.warehouse_capacity) max_cap = std::max(max_cap, cap);
    const double n = std::max(1, c.action_levels);
    c.batch_size = std::max<int>(1, static_cast<int>(std::lround(2.0 * static_cast<double>(max_cap) / n)));
  }
  if (c.batch_size < 1) throw ConfigError("batch_size", "must be >= 1");

  require_shape(c.initial_inventory, n_stores + 1, n_products, "initial_inventory");
  for (std::size_t w = 0; w <= n_stores; ++w) {
    for (std::size_t k = 0; k < n_products; ++k) {
      const auto value = c.initial_inventory[w][k];
      const auto cap = w == 0 ? c.warehouse_capacity[k] : c.store_capacity[w - 1][k];
      if (value < 0 || value > cap) {
        throw ConfigError("initial_inventory." + std::to_string(w) + "." + std::to_string(k),
                          "must lie in [0, capacity]");
      }
    }
  }
}

std::uint64_t config_hash(const ChainConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = mix(h, c.num_stores);
  h = mix(h, c.num_products);
  h = mix(h, c.horizon);
  for (int l : c.store_lead_times) h = mix(h, l);
  h = mix(h, c.warehouse_lead_time);
  h = mix(h, c.history_len);
  for (const auto& row : c.store_capacity) {
    for (auto v : row) h = mix(h, v);
  }
  for (auto v : c.warehouse_capacity) h = mix(h, v);
  auto mix_price = [&h](double p) { h = mix(h, Money::from_double(p).micros()); };
  for (const auto& row : c.selling_price) {
    for (double p : row) mix_price(p);
  }
  for (const auto& row : c.holding_cost) {
    for (double p : row) mix_price(p);
  }
  for (double p : c.procurement_cost) mix_price(p);
  mix_price(c.unfulfilled_penalty_coeff);
  for (const auto& row : c.demand_mean) {
    for (double mu : row) h = mix(h, mu);
  }
  h = mix(h, c.action_levels);
  h = mix(h, c.batch_size);
  for (const auto& row : c.initial_inventory) {
    for (auto v : row) h = mix(h, v);
  }
  return h;
}

ChainConfig make_uniform_chain(const UniformChainParams& p) {
  ChainConfig c;
  const auto n = static_cast<std::size_t>(p.num_stores);
  const auto k = static_cast<std::size_t>(p.num_products);
  c.num_stores = p.num_stores;
  c.num_products = p.num_products;
  c.horizon = p.horizon;
  c.store_lead_times.assign(n, p.store_lead_time);
  c.warehouse_lead_time = p.warehouse_lead_time;
  c.history_len = 0;
  c.store_capacity.assign(n, std::vector<std::int64_t>(k, p.store_capacity));
  c.warehouse_capacity.assign(k, p.warehouse_capacity);
  c.selling_price.assign(k, std::vector<double>(n, p.selling_price));
  c.holding_cost.assign(k, std::vector<double>(n + 1, p.holding_cost));
  c.procurement_cost.assign(k, p.procurement_cost);
  c.unfulfilled_penalty_coeff = p.unfulfilled_penalty_coeff;
  c.demand_mean.assign(n, std::vector<double>(k, p.demand_mean));
  c.action_levels = p.action_levels;
  c.batch_size = p.batch_size;
  c.initial_inventory.assign(n + 1, std::vector<std::int64_t>(k, p.store_initial));
  c.initial_inventory[0].assign(k, p.warehouse_initial);
  resolve_and_validate(c);
  return c;
}

}  // namespace echelon
