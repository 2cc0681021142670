#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "echelon/baselines/base_stock.hpp"
#include "echelon/env/config.hpp"
#include "echelon/env/env.hpp"
#include "echelon/format.hpp"
#include "echelon/harness/experiment.hpp"
#include "echelon/harness/spec.hpp"

namespace echelon {
namespace {

namespace fs = std::filesystem;

const char* kChain = R"(
num_stores: 2
num_products: 1
store_lead_times: 2
warehouse_lead_time: 2
store_capacity: 50
warehouse_capacity: 100
selling_price: 10
holding_cost: 0.1
procurement_cost: 4
unfulfilled_penalty_coeff: 5
demand_mean: 10
initial_inventory: [[60], [30], [30]]
)";

ExperimentSpec spec_with(const std::string& extra, const std::vector<std::string>& overrides = {}) {
  return parse_experiment_spec(std::string(kChain) + extra, overrides);
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("echelon_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

TEST(FormatReal, ShortestRoundTrip) {
  EXPECT_EQ(format_real(7750.0), "7750");
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(-19605.25), "-19605.25");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    EXPECT_EQ(std::stod(format_real(x)), x);
  }
}

TEST(ExperimentSpec, DefaultsAndSections) {
  const auto s = spec_with("experiment:\n  variant: LimWh-LocRwd\n  episodes: 40\n  eval_every: 20\nppo:\n  hidden: [8]\n");
  EXPECT_EQ(s.variant, "LimWh-LocRwd");
  EXPECT_EQ(s.kind(), PolicyKind::kLearned);
  EXPECT_EQ(s.learned_variant(), Variant::kLimWhLocRwd);
  EXPECT_EQ(s.episodes, 40);
  EXPECT_EQ(s.ppo.hidden, std::vector<int>{8});
  EXPECT_EQ(s.ppo.gamma, 0.99);
  EXPECT_EQ(s.chain.num_stores, 2);
  EXPECT_EQ(s.rolling_window, 100);
}

TEST(ExperimentSpec, OverridesAndValidation) {
  const auto s = spec_with("", {"experiment.variant=BSP", "ppo.learning_rate=0.01", "demand_mean.1.0=7"});
  EXPECT_EQ(s.kind(), PolicyKind::kBaseStock);
  EXPECT_EQ(s.ppo.learning_rate, 0.01);
  EXPECT_EQ(s.chain.demand_mean[1][0], 7.0);

  auto field_of = [](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<no error>");
  };
  EXPECT_EQ(field_of([] { spec_with("", {"experiment.variant=DQN"}); }), "experiment.variant");
  EXPECT_EQ(field_of([] { spec_with("", {"experiment.episodes=10", "experiment.eval_every=20"}); }),
            "experiment.eval_every");
  EXPECT_EQ(field_of([] { spec_with("", {"ppo.nonsense=1"}); }), "ppo.nonsense");
  EXPECT_EQ(field_of([] { spec_with("", {"demand_mean.0.0=-5"}); }), "demand_mean.0.0");
  EXPECT_EQ(field_of([] { spec_with("ppo:\n  gamma: 1.5\n"); }), "ppo.gamma");
  EXPECT_EQ(field_of([] { spec_with("experimnt:\n  seed: 1\n"); }), "experimnt");
}

TEST(ExperimentSpec, RenderRoundTrips) {
  const auto s = spec_with("experiment:\n  variant: SARL\n  seed: 42\nppo:\n  reward_scale: 0.003\n");
  const auto text = render_experiment_spec(s);
  const auto back = parse_experiment_spec(text);
  EXPECT_EQ(render_experiment_spec(back), text);
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.ppo.reward_scale, 0.003);
}

TEST(DeriveSeed, DistinctStreams) {
  EXPECT_NE(derive_seed(0, 1), derive_seed(0, 2));
  EXPECT_NE(derive_seed(0, 1), derive_seed(1, 1));
  EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
}

TEST(MetricsLog, RollingMeanOverWindow) {
  ChainConfig c = spec_with("").chain;
  MetricsLog log(3);
  const double returns[] = {3.0, -6.0, 9.0, 12.0, 0.0};
  const double expected[] = {3.0, -1.5, 2.0, 5.0, 7.0};
  for (int i = 0; i < 5; ++i) {
    EpisodeResult r;
    r.total_reward = Money::from_double(returns[i]);
    r.stockouts = i;
    const auto& m = log.append(c, r);
    EXPECT_EQ(m.episode, i + 1);
    EXPECT_DOUBLE_EQ(m.rolling_mean, expected[i]);
    EXPECT_DOUBLE_EQ(m.stockout_rate, i / 60.0);
  }
}

TEST(Train, RandomBaselineWritesOneRowPerEpisodeAndIsReproducible) {
  const auto spec = spec_with("experiment:\n  variant: RANDOM\n  episodes: 50\n  eval_every: 25\n  eval_episodes: 5\n");
  const auto a = scratch("random_a");
  const auto b = scratch("random_b");
  const auto ra = train(spec, {a, {}});
  train(spec, {b, {}});
  EXPECT_EQ(ra.metrics.rows().size(), 50u);
  EXPECT_EQ(ra.evaluations.size(), 2u);
  EXPECT_EQ(read_csv(a / "metrics.csv").size(), 51u);
  EXPECT_EQ(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));
  EXPECT_EQ(slurp(a / "eval.csv"), slurp(b / "eval.csv"));
  EXPECT_EQ(read_csv(a / "timing.csv").size(), 51u);
  EXPECT_EQ(parse_experiment_spec(slurp(a / "spec.resolved")).variant, "RANDOM");
  EXPECT_FALSE(fs::exists(a / "checkpoint_final.bin"));
}

TEST(Train, RandomPolicyDoesNotLearn) {
  const auto spec = spec_with("experiment:\n  variant: RANDOM\n  episodes: 2000\n  eval_every: 2000\n  eval_episodes: 2\n");
  const auto r = train(spec);
  // Least-squares slope of return against episode, as a t-statistic.
  const auto& rows = r.metrics.rows();
  const double n = static_cast<double>(rows.size());
  double mx = 0, my = 0;
  for (const auto& m : rows) {
    mx += m.episode / n;
    my += m.total_return / n;
  }
  double sxx = 0, sxy = 0;
  for (const auto& m : rows) {
    sxx += (m.episode - mx) * (m.episode - mx);
    sxy += (m.episode - mx) * (m.total_return - my);
  }
  const double slope = sxy / sxx;
  double sse = 0;
  for (const auto& m : rows) {
    const double e = m.total_return - my - slope * (m.episode - mx);
    sse += e * e;
  }
  const double se = std::sqrt(sse / (n - 2) / sxx);
  EXPECT_LT(std::abs(slope / se), 4.0);
}

TEST(Train, LearnedVariantWritesCheckpointsThatReload) {
  const auto spec = spec_with(
      "experiment:\n  episodes: 16\n  eval_every: 8\n  eval_episodes: 3\nppo:\n  hidden: [8]\n  episodes_per_update: 8\n");
  const auto dir = scratch("learned");
  const auto r = train(spec, {dir, {}});
  ASSERT_TRUE(fs::exists(dir / "checkpoint_best.bin"));
  ASSERT_TRUE(fs::exists(dir / "checkpoint_final.bin"));
  auto handle = make_policy(spec, dir / "checkpoint_final.bin");
  const auto seeds = evaluation_seeds(spec);
  const auto again = evaluate(*handle.policy, spec.chain, seeds);
  EXPECT_EQ(again.mean_return, r.evaluations.back().second.mean_return);

  // Evaluation leaves the checkpoint untouched.
  const auto before = slurp(dir / "checkpoint_final.bin");
  evaluate(*handle.policy, spec.chain, seeds);
  EXPECT_EQ(slurp(dir / "checkpoint_final.bin"), before);

  const auto other = spec_with("experiment:\n  variant: LimWh-ShRwd\nppo:\n  hidden: [8]\n");
  EXPECT_THROW(make_policy(other, dir / "checkpoint_final.bin"), CheckpointError);
}

TEST(Evaluate, SamePolicySameSeedsSameSummary) {
  const auto spec = spec_with("experiment:\n  variant: RANDOM\n  eval_episodes: 10\n");
  auto h1 = make_policy(spec);
  auto h2 = make_policy(spec);
  const auto seeds = evaluation_seeds(spec);
  const auto a = evaluate(*h1.policy, spec.chain, seeds);
  const auto b = evaluate(*h2.policy, spec.chain, seeds);
  EXPECT_EQ(a.returns, b.returns);
  EXPECT_EQ(a.stockout_rate, b.stockout_rate);
  EXPECT_EQ(a.returns.size(), 10u);
}

class ZeroOrders : public ActionPolicy {
 public:
  explicit ZeroOrders(const ChainConfig& c) : c_(c) {}
  ActionSet act(const Env&) override { return ActionSet::zeros(c_); }

 private:
  ChainConfig c_;
};

TEST(Evaluate, ZeroDemandBestReturnIsZero) {
  auto spec = spec_with("", {"demand_mean.0.0=0", "demand_mean.1.0=0", "initial_inventory.0.0=0",
                             "initial_inventory.1.0=0", "initial_inventory.2.0=0"});
  const auto seeds = seed_range(7, 10);
  ZeroOrders zero(spec.chain);
  const auto z = evaluate(zero, spec.chain, seeds);
  EXPECT_EQ(z.mean_return, 0.0);
  EXPECT_EQ(z.stockout_rate, 0.0);
  spec.variant = "RANDOM";
  auto random = make_policy(spec);
  EXPECT_LT(evaluate(*random.policy, spec.chain, seeds).mean_return, 0.0);
}

TEST(Trace, OneRowPerPeriodVertexProductAndConservation) {
  const auto spec = spec_with("experiment:\n  variant: RANDOM\n");
  auto handle = make_policy(spec);
  const auto dir = scratch("trace");
  trace_inventories(*handle.policy, spec.chain, 3, dir / "trace.csv");
  const auto rows = read_csv(dir / "trace.csv");
  ASSERT_EQ(rows.size(), 1u + 30u * 3u);
  EXPECT_EQ(rows[0][0], "t");

  // (vertex) -> per-period columns on_hand, in_transit, accepted, sales
  std::map<int, std::vector<std::array<long long, 4>>> series;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const int vertex = std::stoi(rows[i][1]);
    EXPECT_EQ(std::stoi(rows[i][0]), static_cast<int>(series[vertex].size()));
    series[vertex].push_back({std::stoll(rows[i][3]), std::stoll(rows[i][4]), std::stoll(rows[i][6]),
                              std::stoll(rows[i][8])});
  }
  ASSERT_EQ(series.size(), 3u);
  for (const auto& [vertex, s] : series) {
    ASSERT_EQ(s.size(), 30u);
    const int lead = vertex == 0 ? spec.chain.warehouse_lead_time : spec.chain.store_lead_times[vertex - 1];
    const long long cap = vertex == 0 ? spec.chain.warehouse_capacity[0] : spec.chain.store_capacity[vertex - 1][0];
    for (int t = 0; t + 1 < 30; ++t) {
      const long long arriving = t - lead >= 0 ? s[t - lead][2] : 0;
      EXPECT_EQ(s[t + 1][0], std::min(cap, s[t][0] - s[t][3] + arriving)) << "vertex " << vertex << " t " << t;
      EXPECT_EQ(s[t + 1][1], s[t][1] - arriving + s[t][2]) << "vertex " << vertex << " t " << t;
    }
  }
}

TEST(Bench, ReportsEveryProductCount) {
  BenchOptions o;
  o.products = {1, 4};
  o.stores = 3;
  o.steps = 40;
  const auto rows = bench_step(o);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_GT(r.vectorized_us, 0.0);
    EXPECT_GT(r.scalar_us, 0.0);
  }
  const auto dir = scratch("bench");
  write_bench_csv(rows, dir / "bench.csv");
  const auto csv = read_csv(dir / "bench.csv");
  ASSERT_EQ(csv.size(), 3u);
  EXPECT_EQ(csv[0][0], "products");
}

void write_metrics(const fs::path& dir, const std::vector<double>& returns) {
  std::ofstream out(dir / "metrics.csv");
  out << MetricsLog::csv_header() << "\n";
  for (std::size_t i = 0; i < returns.size(); ++i) {
    out << i + 1 << "," << returns[i] << ",0,5,1,2,0.5," << (i % 2) << "," << (i % 2) / 60.0 << "\n";
  }
}

TEST(Summarize, EmptyMetricsReportsZeroEpisodes) {
  const auto dir = scratch("summary_empty");
  write_metrics(dir, {});
  EXPECT_NE(summarize(dir).find("0 episodes"), std::string::npos);
}

TEST(Summarize, ReproducesHandComputedRollingMean) {
  const auto dir = scratch("summary_ten");
  write_metrics(dir, {4, 8, 15, 16, 23, 42, -7, 0, 11, 3});
  std::ofstream(dir / "spec.resolved") << render_experiment_spec(spec_with("experiment:\n  rolling_window: 4\n"));
  const auto report = summarize(dir);
  // Windows of 4: last = (-7 + 0 + 11 + 3) / 4 = 1.75; best = (15 + 16 + 23 + 42) / 4 = 24 at episode 6.
  EXPECT_NE(report.find("episodes: 10\n"), std::string::npos);
  EXPECT_NE(report.find("final rolling mean return: 1.75\n"), std::string::npos) << report;
  EXPECT_NE(report.find("best rolling mean return: 24 (episode 6)\n"), std::string::npos) << report;
  EXPECT_NE(report.find("  sales revenue: 5\n"), std::string::npos) << report;
  EXPECT_EQ(summarize(dir), report);
}

TEST(Summarize, DefaultWindowWithoutSpec) {
  const auto dir = scratch("summary_default");
  write_metrics(dir, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  EXPECT_NE(summarize(dir).find("final rolling mean return: 5.5\n"), std::string::npos);
}

TEST(Summarize, RejectsMissingAndCorruptFiles) {
  const auto dir = scratch("summary_bad");
  EXPECT_THROW(summarize(dir), std::runtime_error);
  std::ofstream(dir / "metrics.csv") << "not,a,header\n";
  EXPECT_THROW(summarize(dir), std::runtime_error);
  std::ofstream(dir / "metrics.csv") << MetricsLog::csv_header() << "\n1,abc,0,0,0,0,0,0,0\n";
  EXPECT_THROW(summarize(dir), std::runtime_error);
  std::ofstream(dir / "metrics.csv") << MetricsLog::csv_header() << "\n2,1,0,0,0,0,0,0,0\n";
  EXPECT_THROW(summarize(dir), std::runtime_error);
}

}  // namespace
}  // namespace echelon
