#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "echelon/env/money.hpp"

namespace echelon {

// Column of a (rows, N, 2, K) table: column 0 carries the warehouse value
// copied into every store row, column 1 carries the store's own value.
enum class Column : int { kWarehouse = 0, kStore = 1 };

// Dense row-major integer table of shape (rows, N, 2, K).
class VertexTable {
 public:
  VertexTable() = default;
  VertexTable(int rows, int stores, int products)
      : rows_(rows), stores_(stores), products_(products),
        data_(static_cast<std::size_t>(rows) * stores * 2 * products, 0) {}

  int rows() const { return rows_; }
  int stores() const { return stores_; }
  int products() const { return products_; }

  std::size_t index(int t, int v, Column c, int k) const {
    return ((static_cast<std::size_t>(t) * stores_ + v) * 2 + static_cast<int>(c)) * products_ + k;
  }
  std::int64_t& at(int t, int v, Column c, int k) { return data_[index(t, v, c, k)]; }
  std::int64_t at(int t, int v, Column c, int k) const { return data_[index(t, v, c, k)]; }

  // All N x 2 x K entries of row t.
  std::span<std::int64_t> slab(int t) {
    return {data_.data() + index(t, 0, Column::kWarehouse, 0), slab_size()};
  }
  std::span<const std::int64_t> slab(int t) const {
    return {data_.data() + index(t, 0, Column::kWarehouse, 0), slab_size()};
  }
  // K contiguous entries of one (t, v, column).
  std::span<std::int64_t> lane(int t, int v, Column c) {
    return {data_.data() + index(t, v, c, 0), static_cast<std::size_t>(products_)};
  }
  std::span<const std::int64_t> lane(int t, int v, Column c) const {
    return {data_.data() + index(t, v, c, 0), static_cast<std::size_t>(products_)};
  }

  std::size_t slab_size() const { return static_cast<std::size_t>(stores_) * 2 * products_; }
  const std::vector<std::int64_t>& raw() const { return data_; }
  void fill(std::int64_t value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const VertexTable&, const VertexTable&) = default;

 private:
  int rows_ = 0;
  int stores_ = 0;
  int products_ = 0;
  std::vector<std::int64_t> data_;
};

// Store-only integer table of shape (rows, N, K).
class StoreTable {
 public:
  StoreTable() = default;
  StoreTable(int rows, int stores, int products)
      : rows_(rows), stores_(stores), products_(products),
        data_(static_cast<std::size_t>(rows) * stores * products, 0) {}

  int rows() const { return rows_; }
  std::size_t index(int t, int v, int k) const {
    return (static_cast<std::size_t>(t) * stores_ + v) * products_ + k;
  }
  std::int64_t& at(int t, int v, int k) { return data_[index(t, v, k)]; }
  std::int64_t at(int t, int v, int k) const { return data_[index(t, v, k)]; }
  std::span<std::int64_t> slab(int t) {
    return {data_.data() + index(t, 0, 0), static_cast<std::size_t>(stores_) * products_};
  }
  std::span<const std::int64_t> slab(int t) const {
    return {data_.data() + index(t, 0, 0), static_cast<std::size_t>(stores_) * products_};
  }
  const std::vector<std::int64_t>& raw() const { return data_; }
  void fill(std::int64_t value) { std::fill(data_.begin(), data_.end(), value); }

  friend bool operator==(const StoreTable&, const StoreTable&) = default;

 private:
  int rows_ = 0;
  int stores_ = 0;
  int products_ = 0;
  std::vector<std::int64_t> data_;
};

// Complete per-episode state, one slab per period.
struct EnvTables {
  VertexTable on_hand;     // I, (T+1, N, 2, K)
  VertexTable in_transit;  // I_Transit, (T+1, N, 2, K)
  VertexTable requested;   // R_hat, (T+1, N, 2, K)
  VertexTable accepted;    // R, (T+1, N, 2, K)
  StoreTable demand;       // D, (T, N, K)
  VertexTable sales;       // S, (T, N, 2, K): column 0 accepted replenishment, column 1 store sales
  std::vector<Money> reward;  // P, (T)
  int clock = 0;

  EnvTables() = default;
  EnvTables(int horizon, int stores, int products)
      : on_hand(horizon + 1, stores, products),
        in_transit(horizon + 1, stores, products),
        requested(horizon + 1, stores, products),
        accepted(horizon + 1, stores, products),
        demand(horizon, stores, products),
        sales(horizon, stores, products),
        reward(static_cast<std::size_t>(horizon)) {}

  friend bool operator==(const EnvTables&, const EnvTables&) = default;
};

}  // namespace echelon
