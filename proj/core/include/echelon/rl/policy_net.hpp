#pragma once

#include <Eigen/Dense>

#include <random>
#include <span>
#include <vector>

#include "echelon/rl/mlp.hpp"

namespace echelon {

// Actor-critic network: an MLP trunk whose output layer holds `heads`
// categorical blocks of `levels` logits each, followed by one value row.
class PolicyNet {
 public:
  PolicyNet() = default;
  PolicyNet(int input_size, const std::vector<int>& hidden, int heads, int levels);

  int input_size() const { return mlp_.input_size(); }
  int heads() const { return heads_; }
  int levels() const { return levels_; }
  int value_row() const { return heads_ * levels_; }
  std::size_t num_params() const { return mlp_.num_params(); }

  Mlp& mlp() { return mlp_; }
  const Mlp& mlp() const { return mlp_; }
  Eigen::VectorXd& params() { return mlp_.params(); }
  const Eigen::VectorXd& params() const { return mlp_.params(); }

  // Glorot init with logit rows shrunk so initial heads are near uniform.
  void init(std::mt19937_64& rng);

  // Raw outputs, (heads * levels + 1) x batch.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& obs) const { return mlp_.forward(obs); }

 private:
  Mlp mlp_;
  int heads_ = 0;
  int levels_ = 0;
};

struct PolicyOutput {
  std::vector<std::vector<double>> logits;  // per head
  double value = 0.0;
};

// Single-observation forward pass. Throws ContractError on length mismatch.
PolicyOutput policy_forward(const PolicyNet& net, std::span<const double> obs);

// Numerically stable log-softmax of one head's logits.
Eigen::VectorXd log_softmax(const Eigen::Ref<const Eigen::VectorXd>& logits);

}  // namespace echelon
