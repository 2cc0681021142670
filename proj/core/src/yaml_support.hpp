#pragma once

// Private YAML helpers shared by the config readers. Not installed.

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <set>
#include <type_traits>
#include <string>
#include <vector>

#include "echelon/env/config.hpp"
#include "echelon/format.hpp"

namespace echelon::detail {

inline std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

template <typename T>
T scalar_as(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) throw ConfigError(path, "expected a scalar value");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, "malformed value '" + node.Scalar() + "'");
  }
}

template <typename T>
std::vector<T> vector_as(const YAML::Node& node, std::size_t len, const std::string& path) {
  if (node.IsScalar()) return std::vector<T>(len, scalar_as<T>(node, path));
  if (!node.IsSequence()) throw ConfigError(path, "expected a scalar or a list");
  if (node.size() != len) {
    throw ConfigError(path, "expected " + std::to_string(len) + " entries, got " + std::to_string(node.size()));
  }
  std::vector<T> out;
  out.reserve(len);
  for (std::size_t i = 0; i < len; ++i) out.push_back(scalar_as<T>(node[i], path + "." + std::to_string(i)));
  return out;
}

template <typename T>
std::vector<std::vector<T>> matrix_as(const YAML::Node& node, std::size_t rows, std::size_t cols,
                                      const std::string& path) {
  if (node.IsScalar()) return std::vector<std::vector<T>>(rows, std::vector<T>(cols, scalar_as<T>(node, path)));
  if (!node.IsSequence()) throw ConfigError(path, "expected a scalar or a nested list");
  if (node.size() != rows) {
    throw ConfigError(path, "expected " + std::to_string(rows) + " rows, got " + std::to_string(node.size()));
  }
  std::vector<std::vector<T>> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) out.push_back(vector_as<T>(node[i], cols, path + "." + std::to_string(i)));
  return out;
}

inline void reject_unknown_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                                const std::string& prefix) {
  if (!map.IsMap()) throw ConfigError(prefix, "expected a mapping");
  for (const auto& entry : map) {
    const auto key = entry.first.as<std::string>();
    if (!allowed.contains(key)) throw ConfigError(join_path(prefix, key), "unknown configuration key");
  }
}

inline YAML::Node real_node(double value) { return YAML::Node(format_real(value)); }

template <typename T>
YAML::Node list_node(const std::vector<T>& values) {
  YAML::Node node(YAML::NodeType::Sequence);
  node.SetStyle(YAML::EmitterStyle::Flow);
  for (const auto& v : values) {
    if constexpr (std::is_floating_point_v<T>) {
      node.push_back(real_node(v));
    } else {
      node.push_back(v);
    }
  }
  return node;
}

template <typename T>
YAML::Node matrix_node(const std::vector<std::vector<T>>& rows) {
  YAML::Node node(YAML::NodeType::Sequence);
  node.SetStyle(YAML::EmitterStyle::Flow);
  for (const auto& row : rows) node.push_back(list_node(row));
  return node;
}

// Chain fields live at the top level of a document next to other sections.
const std::set<std::string>& chain_keys();
ChainConfig chain_from_node(const YAML::Node& root, const std::string& prefix);
void chain_into_node(const ChainConfig& config, YAML::Node& root);

// Resolves "a.b.0.c" inside `root` (which must already contain the path)
// and replaces the leaf with the parsed value.
void apply_override(YAML::Node& root, const std::string& assignment);

YAML::Node parse_document(const std::string& text);
std::string emit_document(const YAML::Node& root);

}  // namespace echelon::detail
