#include "echelon/harness/spec.hpp"

#include <fstream>
#include <sstream>

#include "../yaml_support.hpp"

namespace echelon {

using detail::join_path;
using detail::real_node;
using detail::scalar_as;

PolicyKind ExperimentSpec::kind() const {
  if (variant == "BSP") return PolicyKind::kBaseStock;
  if (variant == "RANDOM") return PolicyKind::kRandom;
  return PolicyKind::kLearned;
}

Variant ExperimentSpec::learned_variant() const { return parse_variant(variant); }

const std::vector<std::string>& experiment_tags() {
  static const std::vector<std::string> tags = [] {
    std::vector<std::string> t;
    for (auto v : all_variants()) t.emplace_back(variant_name(v));
    t.emplace_back("BSP");
    t.emplace_back("RANDOM");
    return t;
  }();
  return tags;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

const std::set<std::string> kExperimentKeys = {"variant",        "episodes",       "eval_every", "eval_episodes",
                                               "eval_seed_base", "rolling_window", "seed"};
const std::set<std::string> kPpoKeys = {"gamma",         "gae_lambda",    "clip",         "learning_rate",
                                        "epochs",        "minibatch_size", "value_coeff", "entropy_coeff",
                                        "max_grad_norm", "adam_beta1",    "adam_beta2",   "adam_eps",
                                        "hidden",        "episodes_per_update", "reward_scale", "anneal_lr"};
const std::set<std::string> kBaseStockKeys = {"episodes_per_eval", "seed_base", "max_iters",
                                              "ftol",              "line_tol",  "initial_step"};

template <typename T>
void read_opt(const YAML::Node& map, const char* key, const std::string& prefix, T& out) {
  if (const YAML::Node node = map[key]) out = scalar_as<T>(node, join_path(prefix, key));
}

YAML::Node section(const YAML::Node& root, const char* name, const std::set<std::string>& keys) {
  const YAML::Node node = root[name];
  if (!node) return YAML::Node(YAML::NodeType::Map);
  detail::reject_unknown_keys(node, keys, name);
  return node;
}

ExperimentSpec spec_from_node(const YAML::Node& root) {
  std::set<std::string> top = detail::chain_keys();
  top.insert({"experiment", "ppo", "base_stock"});
  detail::reject_unknown_keys(root, top, "");

  ExperimentSpec s;
  YAML::Node chain(YAML::NodeType::Map);
  for (const auto& entry : root) {
    const auto key = entry.first.as<std::string>();
    if (detail::chain_keys().contains(key)) chain[key] = entry.second;
  }
  s.chain = detail::chain_from_node(chain, "");

  const YAML::Node ex = section(root, "experiment", kExperimentKeys);
  read_opt(ex, "variant", "experiment", s.variant);
  read_opt(ex, "episodes", "experiment", s.episodes);
  read_opt(ex, "eval_every", "experiment", s.eval_every);
  read_opt(ex, "eval_episodes", "experiment", s.eval_episodes);
  read_opt(ex, "eval_seed_base", "experiment", s.eval_seed_base);
  read_opt(ex, "rolling_window", "experiment", s.rolling_window);
  read_opt(ex, "seed", "experiment", s.seed);

  const YAML::Node p = section(root, "ppo", kPpoKeys);
  auto& ppo = s.ppo;
  read_opt(p, "gamma", "ppo", ppo.gamma);
  read_opt(p, "gae_lambda", "ppo", ppo.gae_lambda);
  read_opt(p, "clip", "ppo", ppo.clip);
  read_opt(p, "learning_rate", "ppo", ppo.learning_rate);
  read_opt(p, "epochs", "ppo", ppo.epochs);
  read_opt(p, "minibatch_size", "ppo", ppo.minibatch_size);
  read_opt(p, "value_coeff", "ppo", ppo.value_coeff);
  read_opt(p, "entropy_coeff", "ppo", ppo.entropy_coeff);
  read_opt(p, "max_grad_norm", "ppo", ppo.max_grad_norm);
  read_opt(p, "adam_beta1", "ppo", ppo.adam_beta1);
  read_opt(p, "adam_beta2", "ppo", ppo.adam_beta2);
  read_opt(p, "adam_eps", "ppo", ppo.adam_eps);
  read_opt(p, "episodes_per_update", "ppo", ppo.episodes_per_update);
  read_opt(p, "reward_scale", "ppo", ppo.reward_scale);
  read_opt(p, "anneal_lr", "ppo", ppo.anneal_lr);
  if (const YAML::Node h = p["hidden"]) {
    if (!h.IsSequence()) throw ConfigError("ppo.hidden", "expected a list of layer widths");
    ppo.hidden.clear();
    for (std::size_t i = 0; i < h.size(); ++i) ppo.hidden.push_back(scalar_as<int>(h[i], "ppo.hidden." + std::to_string(i)));
  }

  const YAML::Node b = section(root, "base_stock", kBaseStockKeys);
  auto& bs = s.base_stock;
  read_opt(b, "episodes_per_eval", "base_stock", bs.episodes_per_eval);
  read_opt(b, "seed_base", "base_stock", bs.seed_base);
  read_opt(b, "max_iters", "base_stock", bs.powell.max_iters);
  read_opt(b, "ftol", "base_stock", bs.powell.ftol);
  read_opt(b, "line_tol", "base_stock", bs.powell.line_tol);
  read_opt(b, "initial_step", "base_stock", bs.powell.initial_step);

  validate_experiment_spec(s);
  return s;
}

YAML::Node spec_to_node(const ExperimentSpec& s) {
  YAML::Node root(YAML::NodeType::Map);
  detail::chain_into_node(s.chain, root);

  YAML::Node ex(YAML::NodeType::Map);
  ex["variant"] = s.variant;
  ex["episodes"] = s.episodes;
  ex["eval_every"] = s.eval_every;
  ex["eval_episodes"] = s.eval_episodes;
  ex["eval_seed_base"] = s.eval_seed_base;
  ex["rolling_window"] = s.rolling_window;
  ex["seed"] = s.seed;
  root["experiment"] = ex;

  const auto& ppo = s.ppo;
  YAML::Node p(YAML::NodeType::Map);
  p["gamma"] = real_node(ppo.gamma);
  p["gae_lambda"] = real_node(ppo.gae_lambda);
  p["clip"] = real_node(ppo.clip);
  p["learning_rate"] = real_node(ppo.learning_rate);
  p["epochs"] = ppo.epochs;
  p["minibatch_size"] = ppo.minibatch_size;
  p["value_coeff"] = real_node(ppo.value_coeff);
  p["entropy_coeff"] = real_node(ppo.entropy_coeff);
  p["max_grad_norm"] = real_node(ppo.max_grad_norm);
  p["adam_beta1"] = real_node(ppo.adam_beta1);
  p["adam_beta2"] = real_node(ppo.adam_beta2);
  p["adam_eps"] = real_node(ppo.adam_eps);
  p["hidden"] = detail::list_node(ppo.hidden);
  p["episodes_per_update"] = ppo.episodes_per_update;
  p["reward_scale"] = real_node(ppo.reward_scale);
  p["anneal_lr"] = ppo.anneal_lr;
  root["ppo"] = p;

  const auto& bs = s.base_stock;
  YAML::Node b(YAML::NodeType::Map);
  b["episodes_per_eval"] = bs.episodes_per_eval;
  b["seed_base"] = bs.seed_base;
  b["max_iters"] = bs.powell.max_iters;
  b["ftol"] = real_node(bs.powell.ftol);
  b["line_tol"] = real_node(bs.powell.line_tol);
  b["initial_step"] = real_node(bs.powell.initial_step);
  root["base_stock"] = b;
  return root;
}

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

void validate_experiment_spec(const ExperimentSpec& s) {
  bool known = false;
  for (const auto& t : experiment_tags()) known = known || t == s.variant;
  if (!known) throw ConfigError("experiment.variant", "unknown variant '" + s.variant + "'");
  require(s.episodes >= 1, "experiment.episodes", "must be >= 1");
  require(s.eval_every >= 1, "experiment.eval_every", "must be >= 1");
  require(s.episodes >= s.eval_every, "experiment.eval_every", "must not exceed experiment.episodes");
  require(s.eval_episodes >= 1, "experiment.eval_episodes", "must be >= 1");
  require(s.rolling_window >= 1, "experiment.rolling_window", "must be >= 1");
  const auto& p = s.ppo;
  require(p.gamma >= 0.0 && p.gamma <= 1.0, "ppo.gamma", "must lie in [0, 1]");
  require(p.gae_lambda >= 0.0 && p.gae_lambda <= 1.0, "ppo.gae_lambda", "must lie in [0, 1]");
  require(p.clip >= 0.0, "ppo.clip", "must be >= 0");
  require(p.learning_rate > 0.0, "ppo.learning_rate", "must be > 0");
  require(p.epochs >= 1, "ppo.epochs", "must be >= 1");
  require(p.minibatch_size >= 1, "ppo.minibatch_size", "must be >= 1");
  require(p.value_coeff >= 0.0, "ppo.value_coeff", "must be >= 0");
  require(p.entropy_coeff >= 0.0, "ppo.entropy_coeff", "must be >= 0");
  require(p.max_grad_norm >= 0.0, "ppo.max_grad_norm", "must be >= 0");
  require(p.adam_beta1 >= 0.0 && p.adam_beta1 < 1.0, "ppo.adam_beta1", "must lie in [0, 1)");
  require(p.adam_beta2 >= 0.0 && p.adam_beta2 < 1.0, "ppo.adam_beta2", "must lie in [0, 1)");
  require(p.adam_eps > 0.0, "ppo.adam_eps", "must be > 0");
  require(!p.hidden.empty(), "ppo.hidden", "needs at least one layer");
  for (int w : p.hidden) require(w >= 1, "ppo.hidden", "layer widths must be >= 1");
  require(p.episodes_per_update >= 1, "ppo.episodes_per_update", "must be >= 1");
  require(p.reward_scale > 0.0, "ppo.reward_scale", "must be > 0");
  const auto& b = s.base_stock;
  require(b.episodes_per_eval >= 1, "base_stock.episodes_per_eval", "must be >= 1");
  require(b.powell.max_iters >= 1, "base_stock.max_iters", "must be >= 1");
  require(b.powell.ftol > 0.0, "base_stock.ftol", "must be > 0");
  require(b.powell.line_tol > 0.0, "base_stock.line_tol", "must be > 0");
  require(b.powell.initial_step > 0.0, "base_stock.initial_step", "must be > 0");
}

ExperimentSpec parse_experiment_spec(const std::string& text, const std::vector<std::string>& overrides) {
  ExperimentSpec spec = spec_from_node(detail::parse_document(text));
  if (overrides.empty()) return spec;
  YAML::Node resolved = spec_to_node(spec);
  for (const auto& o : overrides) detail::apply_override(resolved, o);
  return spec_from_node(resolved);
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open configuration file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_spec(buffer.str(), overrides);
}

std::string render_experiment_spec(const ExperimentSpec& spec) {
  return detail::emit_document(spec_to_node(spec));
}

}  // namespace echelon
