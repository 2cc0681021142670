#include "echelon/rl/agents.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "echelon/env/config.hpp"

namespace echelon {

SampledHeads sample_heads(const PolicyNet& net, const Eigen::MatrixXd& obs, std::mt19937_64& rng, bool greedy) {
  const Eigen::MatrixXd out = net.forward(obs);
  const int heads = net.heads();
  const int levels = net.levels();
  const auto batch = static_cast<std::size_t>(obs.cols());
  SampledHeads s;
  s.actions.resize(batch * heads);
  s.log_probs.assign(batch, 0.0);
  s.values.resize(batch);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto col = static_cast<Eigen::Index>(b);
    for (int h = 0; h < heads; ++h) {
      const Eigen::VectorXd logp = log_softmax(out.col(col).segment(static_cast<Eigen::Index>(h) * levels, levels));
      int pick = 0;
      if (greedy) {
        logp.maxCoeff(&pick);
      } else {
        const double u = unit(rng);
        double acc = 0.0;
        pick = levels - 1;
        for (int j = 0; j < levels; ++j) {
          acc += std::exp(logp[j]);
          if (u < acc) {
            pick = j;
            break;
          }
        }
      }
      s.actions[b * heads + h] = pick;
      s.log_probs[b] += logp[pick];
    }
    s.values[b] = out(net.value_row(), col);
  }
  return s;
}

AgentSystem::AgentSystem(const ChainConfig& config, Variant variant, const PpoConfig& ppo, std::uint64_t seed)
    : config_(config), variant_(variant), traits_(traits(variant)), ppo_(ppo), rng_(seed) {
  const int n = config_.num_stores;
  const int kk = config_.num_products;
  if (traits_.single_agent) {
    add_agent(AgentRole::kCentral, -1, 1, static_cast<int>(central_observation_size(config_)), n * kk + kk);
  } else {
    const bool shared = traits_.shared_product_policy;
    const int products = shared ? 1 : kk;
    const int units = shared ? kk : 1;
    add_agent(AgentRole::kWarehouse, -1, units,
              static_cast<int>(warehouse_observation_size(config_, variant_, products)), products * (1 + n));
    for (int v = 0; v < n; ++v) {
      add_agent(AgentRole::kStore, v, units, static_cast<int>(store_observation_size(config_, v, variant_, products)),
                products);
    }
  }
  std::mt19937_64 init(seed ^ 0x9e3779b97f4a7c15ULL);
  for (auto& a : agents_) {
    a.net.init(init);
    a.adam = Adam(a.net.num_params(), ppo_);
  }
}

void AgentSystem::add_agent(AgentRole role, int store, int units, int obs_size, int heads) {
  Agent a;
  a.role = role;
  a.store = store;
  a.units = units;
  a.net = PolicyNet(obs_size, ppo_.hidden, heads, config_.action_levels + 1);
  a.traj = Trajectory(obs_size, heads);
  agents_.push_back(std::move(a));
}

void AgentSystem::observe(const Agent& agent, const Env& env, int unit, std::span<double> out) const {
  const auto slice = traits_.shared_product_policy ? ProductSlice::one(unit) : ProductSlice::all(config_);
  switch (agent.role) {
    case AgentRole::kStore: build_store_observation(env, agent.store, variant_, slice, out); break;
    case AgentRole::kWarehouse: build_warehouse_observation(env, variant_, slice, out); break;
    case AgentRole::kCentral: build_central_observation(env, out); break;
  }
}

void AgentSystem::apply(const Agent& agent, const int* heads, int unit, ActionSet& actions) const {
  const int n = config_.num_stores;
  const int kk = config_.num_products;
  const std::int64_t b = config_.batch_size;
  const bool shared = traits_.shared_product_policy;
  switch (agent.role) {
    case AgentRole::kStore:
      if (shared) {
        actions.store_requests[agent.store * kk + unit] = heads[0] * b;
      } else {
        for (int k = 0; k < kk; ++k) actions.store_requests[agent.store * kk + k] = heads[k] * b;
      }
      break;
    case AgentRole::kWarehouse:
      if (shared) {
        actions.warehouse_request[unit] = heads[0] * b;
        for (int v = 0; v < n; ++v) actions.warehouse_allocations[v * kk + unit] = heads[1 + v] * b;
      } else {
        for (int k = 0; k < kk; ++k) actions.warehouse_request[k] = heads[k] * b;
        for (int i = 0; i < n * kk; ++i) actions.warehouse_allocations[i] = heads[kk + i] * b;
      }
      break;
    case AgentRole::kCentral:
      for (int i = 0; i < n * kk; ++i) actions.store_requests[i] = heads[i] * b;
      for (int k = 0; k < kk; ++k) actions.warehouse_request[k] = heads[n * kk + k] * b;
      break;
  }
}

void AgentSystem::begin_collection(int envs) {
  if (envs < 1) throw ContractError("begin_collection: need at least one env");
  collecting_envs_ = envs;
  for (auto& a : agents_) {
    a.traj.resize(static_cast<std::size_t>(envs) * a.units * config_.horizon);
    std::fill(a.traj.dones.begin(), a.traj.dones.end(), 0);
  }
}

std::vector<ActionSet> AgentSystem::act(std::span<const Env* const> envs, Mode mode) {
  const auto count = static_cast<int>(envs.size());
  std::vector<ActionSet> actions(envs.size(), ActionSet::full(config_));
  if (count == 0) return actions;
  const int t = envs[0]->clock();
  for (const auto* e : envs) {
    if (e->clock() != t) throw ContractError("AgentSystem::act: envs are not in lockstep");
    if (e->done()) throw EpisodeComplete();
  }
  const bool record = mode == Mode::kSample && collecting_envs_ > 0;
  if (record && count != collecting_envs_) throw ContractError("AgentSystem::act: env count differs from collection");
  const int horizon = config_.horizon;

  for (auto& agent : agents_) {
    const int cols = count * agent.units;
    Eigen::MatrixXd obs(agent.net.input_size(), cols);
    for (int e = 0; e < count; ++e) {
      for (int u = 0; u < agent.units; ++u) {
        const int col = e * agent.units + u;
        observe(agent, *envs[e], u, std::span<double>(obs.col(col).data(), static_cast<std::size_t>(obs.rows())));
      }
    }
    const auto s = sample_heads(agent.net, obs, rng_, mode == Mode::kGreedy);
    const int heads = agent.net.heads();
    for (int col = 0; col < cols; ++col) {
      const int e = col / agent.units;
      const int u = col % agent.units;
      apply(agent, &s.actions[static_cast<std::size_t>(col) * heads], u, actions[e]);
      if (!record) continue;
      const std::size_t slot = static_cast<std::size_t>(col) * horizon + t;
      agent.traj.observations.col(static_cast<Eigen::Index>(slot)) = obs.col(col);
      std::copy_n(&s.actions[static_cast<std::size_t>(col) * heads], heads, &agent.traj.actions[slot * heads]);
      agent.traj.log_probs[slot] = s.log_probs[col];
      agent.traj.values[slot] = s.values[col];
    }
  }
  return actions;
}

double AgentSystem::reward_for(const Agent& agent, int unit, const StepOutcome& outcome,
                               const std::vector<Money>& product) const {
  if (traits_.shared_product_policy) return product[unit].to_double();
  if (traits_.local_rewards) {
    return outcome.local_rewards[agent.role == AgentRole::kStore ? agent.store + 1 : 0].to_double();
  }
  return outcome.shared_reward.to_double();
}

void AgentSystem::record_rewards(std::span<const Env* const> envs, std::span<const StepOutcome> outcomes) {
  if (collecting_envs_ == 0) return;
  if (envs.size() != outcomes.size() || static_cast<int>(envs.size()) != collecting_envs_) {
    throw ContractError("AgentSystem::record_rewards: batch size mismatch");
  }
  const int horizon = config_.horizon;
  std::vector<Money> product;
  for (std::size_t e = 0; e < envs.size(); ++e) {
    const Env& env = *envs[e];
    const int t = env.clock() - 1;
    if (traits_.shared_product_policy) product = product_rewards(config_, env.prices(), env.tables(), t);
    for (auto& agent : agents_) {
      for (int u = 0; u < agent.units; ++u) {
        const std::size_t slot = (e * agent.units + u) * static_cast<std::size_t>(horizon) + t;
        agent.traj.rewards[slot] = ppo_.reward_scale * reward_for(agent, u, outcomes[e], product);
        agent.traj.dones[slot] = t == horizon - 1 ? 1 : 0;
      }
    }
  }
}

std::vector<UpdateStats> AgentSystem::update() {
  std::vector<UpdateStats> stats;
  for (auto& agent : agents_) {
    auto& tr = agent.traj;
    for (std::size_t i = 0; i < tr.size(); i += static_cast<std::size_t>(config_.horizon)) {
      if (!tr.dones[i + config_.horizon - 1]) throw ContractError("AgentSystem::update: episodes are incomplete");
    }
    auto gae = compute_gae(tr.rewards, tr.values, tr.dones, ppo_.gamma, ppo_.gae_lambda);
    tr.advantages = std::move(gae.advantages);
    tr.returns = std::move(gae.returns);
    stats.push_back(ppo_update(agent.net, agent.adam, tr, ppo_, rng_));
  }
  collecting_envs_ = 0;
  return stats;
}

void AgentSystem::set_learning_rate_fraction(double fraction) {
  for (auto& a : agents_) a.adam.set_learning_rate(ppo_.learning_rate * fraction);
}

std::string AgentSystem::manifest() const {
  std::ostringstream m;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(config_)));
  m << "echelon-checkpoint 1\n"
    << "variant " << variant_name(variant_) << "\n"
    << "config_hash " << hash << "\n"
    << "agents " << agents_.size() << "\n";
  for (const auto& a : agents_) {
    m << "agent " << (a.role == AgentRole::kStore ? "store" : a.role == AgentRole::kWarehouse ? "warehouse" : "central")
      << ' ' << a.store << " sizes";
    for (int s : a.net.mlp().sizes()) m << ' ' << s;
    m << " heads " << a.net.heads() << " levels " << a.net.levels() << " params " << a.net.num_params() << "\n";
  }
  m << "end\n";
  return m.str();
}

void AgentSystem::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out << manifest();
  for (const auto& a : agents_) {
    out.write(reinterpret_cast<const char*>(a.net.params().data()),
              static_cast<std::streamsize>(a.net.num_params() * sizeof(double)));
  }
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

void AgentSystem::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
  std::istringstream expected(manifest());
  std::string want, got;
  while (std::getline(expected, want)) {
    if (!std::getline(in, got)) throw CheckpointError(path.string() + ": truncated manifest");
    if (got != want) {
      throw CheckpointError(path.string() + ": manifest mismatch, expected '" + want + "' but found '" + got + "'");
    }
  }
  std::vector<Eigen::VectorXd> loaded;
  for (const auto& a : agents_) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(a.net.num_params()));
    in.read(reinterpret_cast<char*>(p.data()), static_cast<std::streamsize>(p.size() * sizeof(double)));
    if (!in) throw CheckpointError(path.string() + ": truncated parameter block");
    loaded.push_back(std::move(p));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError(path.string() + ": trailing bytes");
  for (std::size_t i = 0; i < agents_.size(); ++i) agents_[i].net.params() = std::move(loaded[i]);
}

ActionSet AgentPolicy::act(const Env& env) {
  const Env* one[] = {&env};
  return system_.act(one, mode_).front();
}

}  // namespace echelon
