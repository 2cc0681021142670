#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "echelon/env/env.hpp"

namespace echelon {

enum class Variant {
  kCmarl,        // enhanced warehouse, shared reward (EnWh-ShRwd)
  kEnWhLocRwd,
  kLimWhShRwd,
  kLimWhLocRwd,
  kOCmarl,       // CMARL whose stores also see demand l_v periods ahead
  kShPol,        // CMARL with one K = 1 policy per agent shared across products
  kSarl,         // single agent over the concatenated chain
};

struct VariantTraits {
  bool enhanced_warehouse = true;
  bool local_rewards = false;
  bool oracle = false;
  bool shared_product_policy = false;
  bool single_agent = false;
};

VariantTraits traits(Variant v);
std::string_view variant_name(Variant v);
// Accepts the names returned by variant_name (CMARL, EnWh-ShRwd as an alias, ...).
// Throws std::invalid_argument on unknown tags.
Variant parse_variant(std::string_view tag);
const std::vector<Variant>& all_variants();

// Products covered by an observation: all of them, or a single product
// for shared-product policies.
struct ProductSlice {
  int first = 0;
  int count = 0;
  static ProductSlice all(const ChainConfig& c) { return {0, c.num_products}; }
  static ProductSlice one(int k) { return {k, 1}; }
};

// Store v: [x_v(t); r_v(t-1); ...; r_v(t-l_v)] in blocks of the slice's
// products, each entry divided by the store capacity. The oracle variant
// appends D_v(t + l_v) (zero past the horizon).
std::size_t store_observation_size(const ChainConfig& c, int v, Variant variant, int products);
void build_store_observation(const Env& env, int v, Variant variant, ProductSlice slice, std::span<double> out);
std::vector<double> build_store_observation(const Env& env, int v, Variant variant);

// Warehouse: [x_wh(t); r_wh(t-1..t-m); r_hat_1(t-1..t-m); ...; r_hat_N(t-1..t-m)]
// with m = history_len. LimWh variants omit the store-request blocks.
// Warehouse entries are divided by the warehouse capacity, store requests
// by the requesting store's capacity. History before t = 0 reads zero.
std::size_t warehouse_observation_size(const ChainConfig& c, Variant variant, int products);
void build_warehouse_observation(const Env& env, Variant variant, ProductSlice slice, std::span<double> out);
std::vector<double> build_warehouse_observation(const Env& env, Variant variant);

// Single-agent view: warehouse (LimWh layout) followed by every store.
std::size_t central_observation_size(const ChainConfig& c);
void build_central_observation(const Env& env, std::span<double> out);

}  // namespace echelon
