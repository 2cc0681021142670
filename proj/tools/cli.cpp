#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "echelon/env/config.hpp"
#include "echelon/format.hpp"
#include "echelon/harness/experiment.hpp"
#include "echelon/harness/spec.hpp"
#include "echelon/rl/agents.hpp"

namespace echelon::cli {
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTraceStream = 4;

struct Invocation {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<int> episodes;
  std::string out_dir;
  std::string checkpoint;
  bool quiet = false;
};

class Session {
 public:
  Session(const Invocation& inv, std::ostream& out, std::ostream& err) : inv_(inv), out_(out), err_(err) {}

  void log(const std::string& line) const {
    if (!inv_.quiet) err_ << line << "\n";
  }

  // Flags are folded in as overrides after --set, so they win and are
  // validated exactly like file values.
  ExperimentSpec spec(const char* episodes_key) const {
    std::vector<std::string> overrides = inv_.overrides;
    if (inv_.seed) overrides.push_back("experiment.seed=" + std::to_string(*inv_.seed));
    if (inv_.variant) overrides.push_back("experiment.variant=" + *inv_.variant);
    if (inv_.episodes) overrides.push_back(std::string(episodes_key) + "=" + std::to_string(*inv_.episodes));
    return load_experiment_spec(inv_.config, overrides);
  }

  fs::path out_dir(const ExperimentSpec& spec) const {
    fs::path dir = inv_.out_dir.empty() ? fs::path("runs") / (spec.variant + "-seed" + std::to_string(spec.seed))
                                        : fs::path(inv_.out_dir);
    fs::create_directories(dir);
    std::ofstream(dir / "spec.resolved", std::ios::binary) << render_experiment_spec(spec);
    return dir;
  }

  std::optional<fs::path> checkpoint() const {
    if (inv_.checkpoint.empty()) return std::nullopt;
    return fs::path(inv_.checkpoint);
  }

  void print_summary(const std::string& label, const EvalSummary& s) const {
    out_ << label << ": " << s.episodes << " episodes, mean return " << format_real(s.mean_return) << " (stdev "
         << format_real(s.stdev_return) << "), stock-out rate " << format_real(s.stockout_rate) << "\n"
         << "  sales " << format_real(s.sales_revenue) << ", holding " << format_real(s.holding_cost)
         << ", procurement " << format_real(s.procurement_cost) << ", unfulfilled "
         << format_real(s.unfulfilled_penalty) << "\n";
  }

  void write_eval_csv(const fs::path& path, const std::vector<std::uint64_t>& seeds, const EvalSummary& s) const {
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write " + path.string());
    csv << "seed,return,stockout_rate\n";
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      csv << seeds[i] << "," << format_real(s.returns[i]) << "," << format_real(s.stockout_rates[i]) << "\n";
    }
  }

  int train() const {
    const auto spec = this->spec("experiment.episodes");
    const auto dir = out_dir(spec);
    log("training " + spec.variant + " for " + std::to_string(spec.episodes) + " episodes into " + dir.string());
    TrainOptions options{dir, [this](const std::string& line) { log(line); }};
    const auto result = echelon::train(spec, options);
    out_ << "episodes: " << result.metrics.rows().size() << "\n"
         << "best rolling mean: " << format_real(result.best_rolling_mean) << " (episode " << result.best_episode
         << ")\n";
    if (!result.evaluations.empty()) print_summary("final greedy evaluation", result.evaluations.back().second);
    return kOk;
  }

  int eval() const {
    const auto spec = this->spec("experiment.eval_episodes");
    const auto dir = out_dir(spec);
    if (spec.kind() == PolicyKind::kLearned && !checkpoint()) {
      log("warning: no --checkpoint given; evaluating freshly initialized agents");
    }
    auto handle = make_policy(spec, checkpoint());
    const auto seeds = evaluation_seeds(spec);
    const auto summary = evaluate(*handle.policy, spec.chain, seeds);
    write_eval_csv(dir / "eval.csv", seeds, summary);
    print_summary(spec.variant, summary);
    return kOk;
  }

  int baseline() const {
    auto spec = this->spec("experiment.eval_episodes");
    if (spec.kind() == PolicyKind::kLearned) {
      if (inv_.variant) throw ConfigError("--variant", "baseline accepts BSP or RANDOM");
      spec.variant = "BSP";
    }
    const auto dir = out_dir(spec);
    log("preparing " + spec.variant);
    auto handle = make_policy(spec);
    const auto seeds = evaluation_seeds(spec);
    const auto summary = evaluate(*handle.policy, spec.chain, seeds);
    write_eval_csv(dir / "eval.csv", seeds, summary);
    if (!handle.base_stock_levels.empty()) {
      std::ofstream csv(dir / "base_stock_levels.csv", std::ios::binary);
      csv << "vertex,product,level\n";
      const auto k = static_cast<std::size_t>(spec.chain.num_products);
      for (std::size_t i = 0; i < handle.base_stock_levels.size(); ++i) {
        csv << i / k << "," << i % k << "," << format_real(handle.base_stock_levels[i]) << "\n";
      }
      out_ << "base-stock levels:";
      for (double z : handle.base_stock_levels) out_ << " " << format_real(z);
      out_ << "\n";
    }
    print_summary(spec.variant, summary);
    return kOk;
  }

  int trace() const {
    const auto spec = this->spec("experiment.episodes");
    const auto dir = out_dir(spec);
    auto handle = make_policy(spec, checkpoint());
    const auto seed = derive_seed(spec.seed, kTraceStream);
    trace_inventories(*handle.policy, spec.chain, seed, dir / "trace.csv");
    out_ << "wrote " << (dir / "trace.csv").string() << " (" << spec.chain.horizon << " periods)\n";
    return kOk;
  }

  int bench(const std::vector<int>& products, int stores, int steps) const {
    BenchOptions options;
    options.products = products;
    options.stores = stores;
    options.steps = steps;
    options.seed = inv_.seed.value_or(0);
    const fs::path dir = inv_.out_dir.empty() ? fs::path(".") : fs::path(inv_.out_dir);
    fs::create_directories(dir);
    log("benchmarking " + std::to_string(steps) + " steps per product count");
    const auto rows = bench_step(options);
    write_bench_csv(rows, dir / "bench.csv");
    out_ << "products  vectorized_us  scalar_us  ratio\n";
    for (const auto& r : rows) {
      char line[96];
      std::snprintf(line, sizeof(line), "%8d  %13.3f  %9.3f  %5.3f\n", r.products, r.vectorized_us, r.scalar_us,
                    r.vectorized_us / r.scalar_us);
      out_ << line;
    }
    return kOk;
  }

  int validate() const {
    out_ << render_experiment_spec(spec("experiment.episodes"));
    return kOk;
  }

  int summarize(const std::string& run_dir) const {
    out_ << echelon::summarize(run_dir);
    return kOk;
  }

 private:
  const Invocation& inv_;
  std::ostream& out_;
  std::ostream& err_;
};

void add_common(CLI::App* cmd, Invocation& inv) {
  cmd->add_option("--config", inv.config, "Experiment YAML file")->required();
  cmd->add_option("--set", inv.overrides, "Override a config key, KEY=VALUE (repeatable)")->allow_extra_args(false);
  cmd->add_option("--seed", inv.seed, "Run seed");
  cmd->add_option("--variant", inv.variant, "Variant tag");
  cmd->add_option("--out", inv.out_dir, "Output directory");
  cmd->add_flag("--quiet", inv.quiet, "Suppress progress output");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-echelon inventory simulator and policy training harness", "echelon"};
  app.require_subcommand(1);
  Invocation inv;

  auto* train = app.add_subcommand("train", "Train a variant (or run a baseline) and log per-episode metrics");
  add_common(train, inv);
  train->add_option("--episodes", inv.episodes, "Episode budget");

  auto* eval = app.add_subcommand("eval", "Greedy evaluation on the evaluation seed set");
  add_common(eval, inv);
  eval->add_option("--episodes", inv.episodes, "Number of evaluation episodes");
  eval->add_option("--checkpoint", inv.checkpoint, "Checkpoint for learned variants")->check(CLI::ExistingFile);

  auto* baseline = app.add_subcommand("baseline", "Tune and evaluate the base-stock or random baseline");
  add_common(baseline, inv);
  baseline->add_option("--episodes", inv.episodes, "Number of evaluation episodes");

  auto* trace = app.add_subcommand("trace", "Write one greedy episode as a per-period inventory trace");
  add_common(trace, inv);
  trace->add_option("--checkpoint", inv.checkpoint, "Checkpoint for learned variants")->check(CLI::ExistingFile);

  std::vector<int> products{1, 10, 100, 1000};
  int stores = 10;
  int steps = 1000;
  auto* bench = app.add_subcommand("bench", "Time vectorized and scalar steps across product counts");
  bench->add_option("--products", products, "Product counts to sweep")->check(CLI::PositiveNumber);
  bench->add_option("--stores", stores, "Number of stores")->check(CLI::PositiveNumber);
  bench->add_option("--steps", steps, "Timed steps per product count")->check(CLI::PositiveNumber);
  bench->add_option("--seed", inv.seed, "Seed for actions and demand");
  bench->add_option("--out", inv.out_dir, "Output directory");
  bench->add_flag("--quiet", inv.quiet, "Suppress progress output");

  auto* validate = app.add_subcommand("validate", "Check a config and print the resolved experiment");
  add_common(validate, inv);
  validate->add_option("--episodes", inv.episodes, "Episode budget");

  std::string run_dir;
  auto* summarize = app.add_subcommand("summarize", "Report on a run directory's metrics.csv");
  summarize->add_option("run_dir", run_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  Session session(inv, out, err);
  try {
    if (train->parsed()) return session.train();
    if (eval->parsed()) return session.eval();
    if (baseline->parsed()) return session.baseline();
    if (trace->parsed()) return session.trace();
    if (bench->parsed()) return session.bench(products, stores, steps);
    if (validate->parsed()) return session.validate();
    if (summarize->parsed()) return session.summarize(run_dir);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << "\n";
    return kRuntime;
  } catch (const TrainingHalted& e) {
    err << "training halted: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace echelon::cli
