#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "echelon/rl/policy_net.hpp"

namespace echelon {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double learning_rate = 3e-4;
  int epochs = 4;
  int minibatch_size = 64;
  double value_coeff = 0.5;
  double entropy_coeff = 0.01;
  double max_grad_norm = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::vector<int> hidden{128, 128};
  int episodes_per_update = 8;
  double reward_scale = 0.01;  // rewards are multiplied by this before learning
  bool anneal_lr = true;       // learning rate decays linearly to zero over the run
};

// One agent's transitions. Sample i occupies column i of `observations`
// and entries [i * heads, (i + 1) * heads) of `actions`.
struct Trajectory {
  int obs_size = 0;
  int heads = 0;
  Eigen::MatrixXd observations;
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  std::vector<double> advantages;
  std::vector<double> returns;

  Trajectory() = default;
  Trajectory(int obs_size, int heads) : obs_size(obs_size), heads(heads) {}

  std::size_t size() const { return log_probs.size(); }
  void resize(std::size_t n);
  void clear() { resize(0); }
};

struct Gae {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Backward GAE recursion; a done flag at i ends the episode after sample i.
// Advantages are raw here; ppo_update normalizes them per batch.
Gae compute_gae(std::span<const double> rewards, std::span<const double> values,
                std::span<const std::uint8_t> dones, double gamma, double lambda);

// Shifts and scales to zero mean and unit variance (no-op for fewer than 2 entries).
void normalize_in_place(std::vector<double>& x);

struct LossTerms {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// PPO loss on the listed samples: -clipped surrogate + c_v * value MSE - c_e * entropy,
// with the entropy summed over heads. If grad is non-null, dL/dparams is written to it.
// `advantages` overrides traj.advantages (used for per-batch normalization).
LossTerms ppo_loss(const PolicyNet& net, const Trajectory& traj, std::span<const double> advantages,
                   std::span<const std::size_t> indices, const PpoConfig& config, Eigen::VectorXd* grad);

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t num_params, const PpoConfig& config);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  std::int64_t steps() const { return t_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_ = 0.0, beta1_ = 0.0, beta2_ = 0.0, eps_ = 0.0;
  std::int64_t t_ = 0;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;  // mean pre-clip global norm
  int minibatches = 0;
  bool aborted = false;  // non-finite loss seen; parameters and optimizer rolled back
};

// Epochs of shuffled minibatch Adam steps on the trajectory. Requires
// advantages and returns to be populated.
UpdateStats ppo_update(PolicyNet& net, Adam& adam, const Trajectory& traj, const PpoConfig& config,
                       std::mt19937_64& rng);

// Worst relative error between the analytic gradient and central finite
// differences with step h, over all parameters. The loss callback must
// write the gradient when its second argument is non-null.
using LossFunction = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;
double gradient_check(const LossFunction& loss, const Eigen::VectorXd& params, double h = 1e-5);

}  // namespace echelon
