#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "echelon/env/money.hpp"

namespace echelon {

// Raised for any invalid configuration; field() names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Full parameterization of a one-warehouse, N-store, K-product chain.
//
// Vertex numbering used by per-vertex fields: vertex 0 is the warehouse,
// vertex v + 1 is store v. Per-(store, product) fields are indexed [v][k],
// per-(product, store) price fields [k][v], as in the reward formulas.
struct ChainConfig {
  int num_stores = 1;
  int num_products = 1;
  int horizon = 30;

  std::vector<int> store_lead_times{2};  // [N]
  int warehouse_lead_time = 2;
  int history_len = 0;  // 0 means max(all lead times)

  std::vector<std::vector<std::int64_t>> store_capacity{{50}};  // [N][K]
  std::vector<std::int64_t> warehouse_capacity{100};            // [K]

  std::vector<std::vector<double>> selling_price{{10.0}};      // [K][N]
  std::vector<std::vector<double>> holding_cost{{0.1, 0.1}};   // [K][N+1]
  std::vector<double> procurement_cost{4.0};                   // [K]
  double unfulfilled_penalty_coeff = 5.0;

  std::vector<std::vector<double>> demand_mean{{10.0}};  // [N][K]

  int action_levels = 20;  // n; levels are 0..n
  int batch_size = 0;      // b; 0 means round(2 * max capacity / n)

  std::vector<std::vector<std::int64_t>> initial_inventory{{60}, {30}};  // [N+1][K]

  // Lead time of any vertex (0 = warehouse).
  int lead_time(int vertex) const {
    return vertex == 0 ? warehouse_lead_time : store_lead_times.at(static_cast<std::size_t>(vertex - 1));
  }
  int max_lead_time() const;
  std::int64_t max_order() const { return static_cast<std::int64_t>(action_levels) * batch_size; }
  // True when every demand mean lies in the commonly used [10, 1000] range.
  bool uses_default_demand_range() const;
};

// Fills derived defaults (history_len, batch_size) and checks every invariant.
// Throws ConfigError naming the first offending field.
void resolve_and_validate(ChainConfig& config);

// Stable 64-bit fingerprint of the resolved chain configuration.
std::uint64_t config_hash(const ChainConfig& config);

// Homogeneous chain helper used by tests, benches and sample configs.
struct UniformChainParams {
  int num_stores = 1;
  int num_products = 1;
  int horizon = 30;
  int store_lead_time = 2;
  int warehouse_lead_time = 2;
  std::int64_t store_capacity = 50;
  std::int64_t warehouse_capacity = 100;
  double selling_price = 10.0;
  double holding_cost = 0.1;
  double procurement_cost = 4.0;
  double unfulfilled_penalty_coeff = 5.0;
  double demand_mean = 10.0;
  int action_levels = 20;
  int batch_size = 0;
  std::int64_t store_initial = 30;
  std::int64_t warehouse_initial = 60;
};

ChainConfig make_uniform_chain(const UniformChainParams& params);

}  // namespace echelon
