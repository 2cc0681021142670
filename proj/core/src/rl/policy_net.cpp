#include "echelon/rl/policy_net.hpp"

#include "echelon/env/env.hpp"

namespace echelon {
namespace {

std::vector<int> layer_sizes(int input, const std::vector<int>& hidden, int outputs) {
  std::vector<int> sizes{input};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(outputs);
  return sizes;
}

}  // namespace

PolicyNet::PolicyNet(int input_size, const std::vector<int>& hidden, int heads, int levels)
    : mlp_(layer_sizes(input_size, hidden, heads * levels + 1)), heads_(heads), levels_(levels) {
  if (heads < 1 || levels < 1) throw ContractError("PolicyNet: need at least one head and one level");
}

void PolicyNet::init(std::mt19937_64& rng) {
  mlp_.init(rng);
  mlp_.scale_output_rows(0, heads_ * levels_, 0.01);
}

Eigen::VectorXd log_softmax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const double top = logits.maxCoeff();
  const double lse = top + std::log((logits.array() - top).exp().sum());
  return logits.array() - lse;
}

PolicyOutput policy_forward(const PolicyNet& net, std::span<const double> obs) {
  if (static_cast<int>(obs.size()) != net.input_size()) {
    throw ContractError("policy_forward: observation has " + std::to_string(obs.size()) + " entries, expected " +
                        std::to_string(net.input_size()));
  }
  const Eigen::Map<const Eigen::VectorXd> x(obs.data(), static_cast<Eigen::Index>(obs.size()));
  const Eigen::VectorXd out = net.forward(x);
  PolicyOutput result;
  for (int h = 0; h < net.heads(); ++h) {
    const auto block = out.segment(static_cast<Eigen::Index>(h) * net.levels(), net.levels());
    result.logits.emplace_back(block.data(), block.data() + block.size());
  }
  result.value = out[net.value_row()];
  return result;
}

}  // namespace echelon
