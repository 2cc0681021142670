#include "echelon/harness/experiment.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "echelon/baselines/base_stock.hpp"
#include "echelon/baselines/random_policy.hpp"
#include "echelon/env/reference.hpp"
#include "echelon/env/trace.hpp"
#include "echelon/format.hpp"
#include "echelon/harness/spec.hpp"

namespace echelon {
namespace {

// Stream ids for derive_seed.
constexpr std::uint64_t kAgentStream = 1;
constexpr std::uint64_t kEpisodeStream = 2;
constexpr std::uint64_t kRandomStream = 3;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string eval_csv_row(int episode, const EvalSummary& s) {
  return std::to_string(episode) + "," + format_real(s.mean_return) + "," + format_real(s.stdev_return) + "," +
         format_real(s.stockout_rate);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

const EpisodeMetrics& MetricsLog::append(const ChainConfig& config, const EpisodeResult& episode) {
  EpisodeMetrics m;
  m.episode = static_cast<int>(rows_.size()) + 1;
  m.total_return = episode.total_reward.to_double();
  m.sales_revenue = episode.components.sales_revenue.to_double();
  m.holding_cost = episode.components.holding_cost.to_double();
  m.procurement_cost = episode.components.procurement_cost.to_double();
  m.unfulfilled_penalty = episode.components.unfulfilled_penalty.to_double();
  m.stockouts = episode.stockouts;
  m.stockout_rate = static_cast<double>(episode.stockouts) / (static_cast<double>(config.num_stores) * config.horizon);
  rows_.push_back(m);
  const std::size_t first = rows_.size() > static_cast<std::size_t>(window_) ? rows_.size() - window_ : 0;
  double sum = 0.0;
  for (std::size_t i = first; i < rows_.size(); ++i) sum += rows_[i].total_return;
  rows_.back().rolling_mean = sum / static_cast<double>(rows_.size() - first);
  return rows_.back();
}

const char* MetricsLog::csv_header() {
  return "episode,return,rolling_mean,sales_revenue,holding_cost,procurement_cost,unfulfilled_penalty,stockouts,"
         "stockout_rate";
}

std::string MetricsLog::csv_row(const EpisodeMetrics& m) {
  std::string row = std::to_string(m.episode);
  for (double x : {m.total_return, m.rolling_mean, m.sales_revenue, m.holding_cost, m.procurement_cost,
                   m.unfulfilled_penalty}) {
    row += "," + format_real(x);
  }
  return row + "," + std::to_string(m.stockouts) + "," + format_real(m.stockout_rate);
}

void MetricsLog::write_csv(const std::filesystem::path& path) const {
  auto out = open_out(path);
  out << csv_header() << "\n";
  for (const auto& m : rows_) out << csv_row(m) << "\n";
}

std::vector<std::uint64_t> evaluation_seeds(const ExperimentSpec& spec) {
  return seed_range(spec.eval_seed_base, spec.eval_episodes);
}

EvalSummary evaluate(ActionPolicy& policy, const ChainConfig& config, std::span<const std::uint64_t> seeds) {
  EvalSummary s;
  s.episodes = static_cast<int>(seeds.size());
  if (seeds.empty()) return s;
  Env env(config, seeds.front());
  RewardComponents totals;
  for (const auto seed : seeds) {
    env.reset(seed);
    const auto r = run_episode(env, policy);
    s.returns.push_back(r.total_reward.to_double());
    s.stockout_rates.push_back(static_cast<double>(r.stockouts) /
                               (static_cast<double>(config.num_stores) * config.horizon));
    totals.sales_revenue += r.components.sales_revenue;
    totals.holding_cost += r.components.holding_cost;
    totals.procurement_cost += r.components.procurement_cost;
    totals.unfulfilled_penalty += r.components.unfulfilled_penalty;
  }
  const double n = static_cast<double>(seeds.size());
  s.mean_return = std::accumulate(s.returns.begin(), s.returns.end(), 0.0) / n;
  double var = 0.0;
  for (double r : s.returns) var += (r - s.mean_return) * (r - s.mean_return);
  s.stdev_return = seeds.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  s.sales_revenue = totals.sales_revenue.to_double() / n;
  s.holding_cost = totals.holding_cost.to_double() / n;
  s.procurement_cost = totals.procurement_cost.to_double() / n;
  s.unfulfilled_penalty = totals.unfulfilled_penalty.to_double() / n;
  s.stockout_rate = std::accumulate(s.stockout_rates.begin(), s.stockout_rates.end(), 0.0) / n;
  return s;
}

PolicyHandle make_policy(const ExperimentSpec& spec, const std::optional<std::filesystem::path>& checkpoint) {
  PolicyHandle h;
  switch (spec.kind()) {
    case PolicyKind::kLearned:
      h.system = std::make_unique<AgentSystem>(spec.chain, spec.learned_variant(), spec.ppo,
                                               derive_seed(spec.seed, kAgentStream));
      if (checkpoint) h.system->load(*checkpoint);
      h.policy = std::make_unique<AgentPolicy>(*h.system);
      break;
    case PolicyKind::kBaseStock:
      h.base_stock_levels = optimize_base_stock(spec.chain, spec.base_stock).levels;
      h.policy = std::make_unique<BaseStockPolicy>(spec.chain, h.base_stock_levels);
      break;
    case PolicyKind::kRandom:
      h.policy = std::make_unique<RandomPolicy>(spec.chain, derive_seed(spec.seed, kRandomStream));
      break;
  }
  return h;
}

TrainResult train(const ExperimentSpec& spec, const TrainOptions& options) {
  validate_experiment_spec(spec);
  const bool write = !options.out_dir.empty();
  auto log = [&](const std::string& line) {
    if (options.log) options.log(line);
  };
  if (write) {
    std::filesystem::create_directories(options.out_dir);
    open_out(options.out_dir / "spec.resolved") << render_experiment_spec(spec);
  }

  const ChainConfig& chain = spec.chain;
  TrainResult result{MetricsLog(spec.rolling_window), {}, {}, {}, 0.0, 0};
  std::vector<double> timing;
  const auto eval_seeds = evaluation_seeds(spec);
  const std::uint64_t episode_base = derive_seed(spec.seed, kEpisodeStream);
  auto episode_seed = [&](int episode) { return derive_seed(episode_base, static_cast<std::uint64_t>(episode)); };

  std::unique_ptr<ActionPolicy> fixed;  // baselines
  std::unique_ptr<AgentSystem> system;
  if (spec.kind() == PolicyKind::kLearned) {
    system = std::make_unique<AgentSystem>(chain, spec.learned_variant(), spec.ppo,
                                           derive_seed(spec.seed, kAgentStream));
  } else if (spec.kind() == PolicyKind::kBaseStock) {
    log("tuning base-stock levels");
    result.base_stock_levels = optimize_base_stock(chain, spec.base_stock).levels;
    fixed = std::make_unique<BaseStockPolicy>(chain, result.base_stock_levels);
    if (write) {
      auto out = open_out(options.out_dir / "base_stock_levels.csv");
      out << "vertex,product,level\n";
      for (std::size_t i = 0; i < result.base_stock_levels.size(); ++i) {
        out << i / chain.num_products << "," << i % chain.num_products << ","
            << format_real(result.base_stock_levels[i]) << "\n";
      }
    }
  } else {
    fixed = std::make_unique<RandomPolicy>(chain, derive_seed(spec.seed, kRandomStream));
  }

  auto greedy_eval = [&]() -> EvalSummary {
    if (system) {
      AgentPolicy greedy(*system);
      return evaluate(greedy, chain, eval_seeds);
    }
    if (spec.kind() == PolicyKind::kRandom) {
      RandomPolicy fresh(chain, derive_seed(spec.seed, kRandomStream));
      return evaluate(fresh, chain, eval_seeds);
    }
    return evaluate(*fixed, chain, eval_seeds);
  };

  const int batch_cap = system ? spec.ppo.episodes_per_update : 1;
  std::vector<Env> envs;
  for (int e = 0; e < batch_cap; ++e) envs.emplace_back(chain, episode_seed(0));
  std::vector<const Env*> env_ptrs;
  std::vector<StepOutcome> outcomes;

  int done_episodes = 0;
  int next_eval = spec.eval_every;
  int consecutive_aborts = 0;
  bool have_best = false;

  while (done_episodes < spec.episodes) {
    const auto start = std::chrono::steady_clock::now();
    const int batch = std::min(batch_cap, spec.episodes - done_episodes);
    std::vector<EpisodeResult> results(static_cast<std::size_t>(batch));
    for (int e = 0; e < batch; ++e) envs[e].reset(episode_seed(done_episodes + e));

    if (system) {
      if (spec.ppo.anneal_lr) {
        system->set_learning_rate_fraction(1.0 - static_cast<double>(done_episodes) / spec.episodes);
      }
      env_ptrs.clear();
      for (int e = 0; e < batch; ++e) env_ptrs.push_back(&envs[e]);
      outcomes.resize(static_cast<std::size_t>(batch));
      system->begin_collection(batch);
      while (!envs[0].done()) {
        const auto actions = system->act(env_ptrs, AgentSystem::Mode::kSample);
        for (int e = 0; e < batch; ++e) {
          results[e].stockouts += stockouts_now(envs[e]);
          outcomes[e] = envs[e].step(actions[e]);
          accumulate(results[e], outcomes[e]);
        }
        system->record_rewards(env_ptrs, outcomes);
      }
      const auto stats = system->update();
      const bool aborted = std::any_of(stats.begin(), stats.end(), [](const UpdateStats& s) { return s.aborted; });
      if (aborted) {
        ++consecutive_aborts;
        log("update after episode " + std::to_string(done_episodes + batch) +
            " aborted on a non-finite loss; parameters rolled back");
        if (consecutive_aborts >= 3) {
          if (write) result.metrics.write_csv(options.out_dir / "metrics.csv");
          throw TrainingHalted("three consecutive PPO updates produced non-finite losses (last after episode " +
                               std::to_string(done_episodes + batch) + ")");
        }
      } else {
        consecutive_aborts = 0;
      }
    } else {
      results[0] = run_episode(envs[0], *fixed);
    }

    const double per_episode = seconds_since(start) / batch;
    for (const auto& r : results) {
      result.metrics.append(chain, r);
      timing.push_back(per_episode);
    }
    done_episodes += batch;

    const double rolling = result.metrics.rows().back().rolling_mean;
    if (!have_best || rolling > result.best_rolling_mean) {
      have_best = true;
      result.best_rolling_mean = rolling;
      result.best_episode = done_episodes;
      if (system && write) system->save(options.out_dir / "checkpoint_best.bin");
    }

    if (done_episodes >= next_eval || done_episodes == spec.episodes) {
      while (next_eval <= done_episodes) next_eval += spec.eval_every;
      const auto summary = greedy_eval();
      result.evaluations.emplace_back(done_episodes, summary);
      log("episode " + std::to_string(done_episodes) + ": rolling mean " + format_real(rolling) +
          ", greedy eval " + format_real(summary.mean_return));
      if (write) result.metrics.write_csv(options.out_dir / "metrics.csv");
    }
  }

  if (write) {
    result.metrics.write_csv(options.out_dir / "metrics.csv");
    auto eval_out = open_out(options.out_dir / "eval.csv");
    eval_out << "episode,mean_return,stdev_return,stockout_rate\n";
    for (const auto& [episode, summary] : result.evaluations) eval_out << eval_csv_row(episode, summary) << "\n";
    auto timing_out = open_out(options.out_dir / "timing.csv");
    timing_out << "episode,seconds\n";
    for (std::size_t i = 0; i < timing.size(); ++i) timing_out << i + 1 << "," << format_real(timing[i]) << "\n";
    if (system) system->save(options.out_dir / "checkpoint_final.bin");
  }
  result.system = std::move(system);
  return result;
}

void trace_inventories(ActionPolicy& policy, const ChainConfig& config, std::uint64_t seed,
                       const std::filesystem::path& path) {
  Env env(config, seed);
  env.reset(seed);
  run_episode(env, policy);
  auto out = open_out(path);
  write_trace_csv(out, env.state());
}

std::vector<BenchRow> bench_step(const BenchOptions& options) {
  using clock = std::chrono::steady_clock;
  auto median = [](std::vector<double>& xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n == 0 ? 0.0 : n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
  };
  std::vector<BenchRow> rows;
  for (int k : options.products) {
    UniformChainParams p;
    p.num_stores = options.stores;
    p.num_products = k;
    const ChainConfig config = make_uniform_chain(p);
    Env env(config, options.seed);
    RandomPolicy random(config, derive_seed(options.seed, kRandomStream));
    EnvState reference;
    std::vector<double> vec_us, scalar_us;
    vec_us.reserve(options.steps);
    scalar_us.reserve(options.steps);
    for (int i = 0; i < options.steps; ++i) {
      if (env.done() || i == 0) {
        env.reset();
        reference = env.state();
      }
      const ActionSet a = random.draw();
      auto t0 = clock::now();
      env.step(a);
      auto t1 = clock::now();
      scalar_reference_step(reference, a);
      auto t2 = clock::now();
      vec_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
      scalar_us.push_back(std::chrono::duration<double, std::micro>(t2 - t1).count());
    }
    rows.push_back({k, median(vec_us), median(scalar_us)});
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "products,vectorized_us,scalar_us,ratio\n";
  for (const auto& r : rows) {
    out << r.products << "," << format_real(r.vectorized_us) << "," << format_real(r.scalar_us) << ","
        << format_real(r.scalar_us > 0 ? r.vectorized_us / r.scalar_us : 0.0) << "\n";
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": malformed number '" + cell + "'");
  }
}

}  // namespace

std::string summarize(const std::filesystem::path& run_dir) {
  const auto path = run_dir / "metrics.csv";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != MetricsLog::csv_header()) {
    throw std::runtime_error(path.string() + ": missing or unexpected header");
  }
  // The window is recorded in spec.resolved; fall back to the default when absent.
  int window = 100;
  if (std::ifstream spec_in(run_dir / "spec.resolved"); spec_in) {
    std::stringstream buffer;
    buffer << spec_in.rdbuf();
    try {
      window = parse_experiment_spec(buffer.str()).rolling_window;
    } catch (const std::exception&) {
      throw std::runtime_error((run_dir / "spec.resolved").string() + ": unreadable experiment spec");
    }
  }

  std::vector<std::array<double, 8>> rows;  // return, 4 components, stockouts, rate
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != 9) throw std::runtime_error(where + ": expected 9 columns");
    if (parse_cell(cells[0], where) != static_cast<double>(rows.size() + 1)) {
      throw std::runtime_error(where + ": episode numbers must run 1, 2, 3, ...");
    }
    std::array<double, 8> r{};
    r[0] = parse_cell(cells[1], where);
    for (int j = 0; j < 4; ++j) r[1 + j] = parse_cell(cells[3 + j], where);
    r[5] = parse_cell(cells[7], where);
    r[6] = parse_cell(cells[8], where);
    rows.push_back(r);
  }

  std::ostringstream out;
  out << "run: " << run_dir.string() << "\n";
  out << "episodes: " << rows.size() << "\n";
  if (rows.empty()) {
    out << "0 episodes recorded; nothing to summarize\n";
    return out.str();
  }
  double best = 0.0;
  std::size_t best_at = 0;
  double final_mean = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t first = i + 1 > static_cast<std::size_t>(window) ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t j = first; j <= i; ++j) sum += rows[j][0];
    const double mean = sum / static_cast<double>(i + 1 - first);
    if (i == 0 || mean > best) {
      best = mean;
      best_at = i + 1;
    }
    final_mean = mean;
  }
  const std::size_t tail = std::min(rows.size(), static_cast<std::size_t>(window));
  std::array<double, 8> avg{};
  for (std::size_t i = rows.size() - tail; i < rows.size(); ++i) {
    for (int j = 0; j < 7; ++j) avg[j] += rows[i][j] / static_cast<double>(tail);
  }
  out << "rolling window: " << window << "\n";
  out << "final rolling mean return: " << format_real(final_mean) << "\n";
  out << "best rolling mean return: " << format_real(best) << " (episode " << best_at << ")\n";
  out << "last " << tail << " episodes, mean per episode:\n";
  out << "  sales revenue: " << format_real(avg[1]) << "\n";
  out << "  holding cost: " << format_real(avg[2]) << "\n";
  out << "  procurement cost: " << format_real(avg[3]) << "\n";
  out << "  unfulfilled penalty: " << format_real(avg[4]) << "\n";
  out << "  stock-outs: " << format_real(avg[5]) << "\n";
  out << "  stock-out rate: " << format_real(avg[6]) << "\n";
  return out.str();
}

}  // namespace echelon
