#include "echelon/rl/observation.hpp"

#include <stdexcept>

namespace echelon {

VariantTraits traits(Variant v) {
  VariantTraits t;
  switch (v) {
    case Variant::kCmarl: break;
    case Variant::kEnWhLocRwd: t.local_rewards = true; break;
    case Variant::kLimWhShRwd: t.enhanced_warehouse = false; break;
    case Variant::kLimWhLocRwd:
      t.enhanced_warehouse = false;
      t.local_rewards = true;
      break;
    case Variant::kOCmarl: t.oracle = true; break;
    case Variant::kShPol: t.shared_product_policy = true; break;
    case Variant::kSarl:
      t.enhanced_warehouse = false;
      t.single_agent = true;
      break;
  }
  return t;
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kCmarl: return "CMARL";
    case Variant::kEnWhLocRwd: return "EnWh-LocRwd";
    case Variant::kLimWhShRwd: return "LimWh-ShRwd";
    case Variant::kLimWhLocRwd: return "LimWh-LocRwd";
    case Variant::kOCmarl: return "O-CMARL";
    case Variant::kShPol: return "ShPol";
    case Variant::kSarl: return "SARL";
  }
  return "?";
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v{Variant::kCmarl,       Variant::kEnWhLocRwd, Variant::kLimWhShRwd,
                                      Variant::kLimWhLocRwd, Variant::kOCmarl,     Variant::kShPol,
                                      Variant::kSarl};
  return v;
}

Variant parse_variant(std::string_view tag) {
  if (tag == "EnWh-ShRwd") return Variant::kCmarl;
  if (tag == "ShPol-CMARL") return Variant::kShPol;
  for (auto v : all_variants()) {
    if (variant_name(v) == tag) return v;
  }
  throw std::invalid_argument("unknown variant '" + std::string(tag) + "'");
}

namespace {

double ratio(std::int64_t q, std::int64_t cap) { return static_cast<double>(q) / static_cast<double>(cap); }

}  // namespace

std::size_t store_observation_size(const ChainConfig& c, int v, Variant variant, int products) {
  const std::size_t per = 1 + static_cast<std::size_t>(c.store_lead_times[v]) + (traits(variant).oracle ? 1 : 0);
  return per * static_cast<std::size_t>(products);
}

void build_store_observation(const Env& env, int v, Variant variant, ProductSlice slice, std::span<double> out) {
  const auto& c = env.config();
  const auto& tb = env.tables();
  const int t = env.clock();
  const int lead = c.store_lead_times[v];
  if (out.size() != store_observation_size(c, v, variant, slice.count)) {
    throw ContractError("build_store_observation: output span has wrong length");
  }
  std::size_t o = 0;
  for (int j = 0; j < slice.count; ++j) {
    const int k = slice.first + j;
    out[o++] = ratio(tb.on_hand.at(t, v, Column::kStore, k), c.store_capacity[v][k]);
  }
  for (int i = 1; i <= lead; ++i) {
    for (int j = 0; j < slice.count; ++j) {
      const int k = slice.first + j;
      out[o++] = t - i < 0 ? 0.0 : ratio(tb.accepted.at(t - i, v, Column::kStore, k), c.store_capacity[v][k]);
    }
  }
  if (traits(variant).oracle) {
    const int ahead = t + lead;
    for (int j = 0; j < slice.count; ++j) {
      const int k = slice.first + j;
      out[o++] = ahead >= c.horizon ? 0.0 : ratio(tb.demand.at(ahead, v, k), c.store_capacity[v][k]);
    }
  }
}

std::vector<double> build_store_observation(const Env& env, int v, Variant variant) {
  const auto slice = ProductSlice::all(env.config());
  std::vector<double> out(store_observation_size(env.config(), v, variant, slice.count));
  build_store_observation(env, v, variant, slice, out);
  return out;
}

std::size_t warehouse_observation_size(const ChainConfig& c, Variant variant, int products) {
  const std::size_t m = static_cast<std::size_t>(c.history_len);
  const std::size_t stores = traits(variant).enhanced_warehouse ? static_cast<std::size_t>(c.num_stores) : 0;
  return static_cast<std::size_t>(products) * (1 + m + stores * m);
}

void build_warehouse_observation(const Env& env, Variant variant, ProductSlice slice, std::span<double> out) {
  const auto& c = env.config();
  const auto& tb = env.tables();
  const int t = env.clock();
  const int m = c.history_len;
  if (out.size() != warehouse_observation_size(c, variant, slice.count)) {
    throw ContractError("build_warehouse_observation: output span has wrong length");
  }
  std::size_t o = 0;
  for (int j = 0; j < slice.count; ++j) {
    const int k = slice.first + j;
    out[o++] = ratio(tb.on_hand.at(t, 0, Column::kWarehouse, k), c.warehouse_capacity[k]);
  }
  for (int i = 1; i <= m; ++i) {
    for (int j = 0; j < slice.count; ++j) {
      const int k = slice.first + j;
      out[o++] = t - i < 0 ? 0.0 : ratio(tb.accepted.at(t - i, 0, Column::kWarehouse, k), c.warehouse_capacity[k]);
    }
  }
  if (!traits(variant).enhanced_warehouse) return;
  for (int v = 0; v < c.num_stores; ++v) {
    for (int i = 1; i <= m; ++i) {
      for (int j = 0; j < slice.count; ++j) {
        const int k = slice.first + j;
        out[o++] = t - i < 0 ? 0.0 : ratio(tb.requested.at(t - i, v, Column::kStore, k), c.store_capacity[v][k]);
      }
    }
  }
}

std::vector<double> build_warehouse_observation(const Env& env, Variant variant) {
  const auto slice = ProductSlice::all(env.config());
  std::vector<double> out(warehouse_observation_size(env.config(), variant, slice.count));
  build_warehouse_observation(env, variant, slice, out);
  return out;
}

std::size_t central_observation_size(const ChainConfig& c) {
  std::size_t n = warehouse_observation_size(c, Variant::kSarl, c.num_products);
  for (int v = 0; v < c.num_stores; ++v) n += store_observation_size(c, v, Variant::kSarl, c.num_products);
  return n;
}

void build_central_observation(const Env& env, std::span<double> out) {
  const auto& c = env.config();
  const auto slice = ProductSlice::all(c);
  std::size_t o = warehouse_observation_size(c, Variant::kSarl, c.num_products);
  build_warehouse_observation(env, Variant::kSarl, slice, out.subspan(0, o));
  for (int v = 0; v < c.num_stores; ++v) {
    const std::size_t len = store_observation_size(c, v, Variant::kSarl, c.num_products);
    build_store_observation(env, v, Variant::kSarl, slice, out.subspan(o, len));
    o += len;
  }
  if (o != out.size()) throw ContractError("build_central_observation: output span has wrong length");
}

}  // namespace echelon
