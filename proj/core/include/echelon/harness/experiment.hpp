#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "echelon/harness/spec.hpp"
#include "echelon/policy.hpp"
#include "echelon/rl/agents.hpp"

namespace echelon {

class TrainingHalted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EpisodeMetrics {
  int episode = 0;  // 1-based
  double total_return = 0.0;
  double rolling_mean = 0.0;
  double sales_revenue = 0.0;
  double holding_cost = 0.0;
  double procurement_cost = 0.0;
  double unfulfilled_penalty = 0.0;
  int stockouts = 0;
  double stockout_rate = 0.0;  // stockouts / (N * T)
};

// Append-only per-episode log with a fixed-width rolling mean.
class MetricsLog {
 public:
  explicit MetricsLog(int window = 100) : window_(window) {}

  const EpisodeMetrics& append(const ChainConfig& config, const EpisodeResult& episode);
  const std::vector<EpisodeMetrics>& rows() const { return rows_; }
  int window() const { return window_; }

  static const char* csv_header();
  static std::string csv_row(const EpisodeMetrics& m);
  void write_csv(const std::filesystem::path& path) const;

 private:
  int window_;
  std::vector<EpisodeMetrics> rows_;
};

struct EvalSummary {
  int episodes = 0;
  double mean_return = 0.0;
  double stdev_return = 0.0;
  double sales_revenue = 0.0;
  double holding_cost = 0.0;
  double procurement_cost = 0.0;
  double unfulfilled_penalty = 0.0;
  double stockout_rate = 0.0;
  std::vector<double> returns;
  std::vector<double> stockout_rates;
};

std::vector<std::uint64_t> evaluation_seeds(const ExperimentSpec& spec);

// Runs one episode per seed from a fresh reset(seed).
EvalSummary evaluate(ActionPolicy& policy, const ChainConfig& config, std::span<const std::uint64_t> seeds);

// A ready-to-run policy for the spec's variant: greedy RL agents (optionally
// loaded from a checkpoint), a Powell-tuned base-stock policy, or random.
struct PolicyHandle {
  std::unique_ptr<AgentSystem> system;
  std::unique_ptr<ActionPolicy> policy;
  std::vector<double> base_stock_levels;
};
PolicyHandle make_policy(const ExperimentSpec& spec, const std::optional<std::filesystem::path>& checkpoint = {});

struct TrainOptions {
  std::filesystem::path out_dir;  // empty: write nothing
  std::function<void(const std::string&)> log;  // progress lines, may be empty
};

struct TrainResult {
  MetricsLog metrics;
  std::vector<std::pair<int, EvalSummary>> evaluations;  // (episode, greedy summary) at each cadence point
  std::unique_ptr<AgentSystem> system;  // final parameters for learned variants
  std::vector<double> base_stock_levels;
  double best_rolling_mean = 0.0;
  int best_episode = 0;
};

// Collect/update cycles until the episode budget is spent. Writes
// metrics.csv, eval.csv, timing.csv, spec.resolved and, for learned
// variants, checkpoint_best.bin / checkpoint_final.bin. Throws TrainingHalted
// after three consecutive aborted updates.
TrainResult train(const ExperimentSpec& spec, const TrainOptions& options = {});

// One greedy episode written in the trace schema.
void trace_inventories(ActionPolicy& policy, const ChainConfig& config, std::uint64_t seed,
                       const std::filesystem::path& path);

struct BenchRow {
  int products = 0;
  double vectorized_us = 0.0;  // median per step
  double scalar_us = 0.0;
};

struct BenchOptions {
  std::vector<int> products{1, 10, 100, 1000};
  int stores = 10;
  int steps = 1000;
  std::uint64_t seed = 0;
};

std::vector<BenchRow> bench_step(const BenchOptions& options);
void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& path);

// Text report over a run directory's metrics.csv. Throws std::runtime_error
// if the file is missing or malformed.
std::string summarize(const std::filesystem::path& run_dir);

}  // namespace echelon
