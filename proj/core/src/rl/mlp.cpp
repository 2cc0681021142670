#include "echelon/rl/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "echelon/env/env.hpp"

namespace echelon {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ContractError("Mlp: need at least input and output sizes");
  Eigen::Index total = 0;
  for (std::size_t j = 0; j + 1 < sizes_.size(); ++j) {
    if (sizes_[j] < 1 || sizes_[j + 1] < 1) throw ContractError("Mlp: layer sizes must be positive");
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[j + 1]) * (sizes_[j] + 1);
  }
  params_ = Eigen::VectorXd::Zero(total);
}

Mlp::MatMap Mlp::weight(std::size_t j) const {
  return MatMap(params_.data() + offsets_[j], sizes_[j + 1], sizes_[j]);
}

Mlp::VecMap Mlp::bias(std::size_t j) const {
  return VecMap(params_.data() + offsets_[j] + static_cast<Eigen::Index>(sizes_[j + 1]) * sizes_[j], sizes_[j + 1]);
}

void Mlp::init(std::mt19937_64& rng) {
  params_.setZero();
  for (std::size_t j = 0; j < num_layers(); ++j) {
    const double limit = std::sqrt(6.0 / (sizes_[j] + sizes_[j + 1]));
    std::uniform_real_distribution<double> u(-limit, limit);
    const Eigen::Index count = static_cast<Eigen::Index>(sizes_[j + 1]) * sizes_[j];
    for (Eigen::Index i = 0; i < count; ++i) params_[offsets_[j] + i] = u(rng);
  }
}

void Mlp::scale_output_rows(int first, int count, double gain) {
  const std::size_t j = num_layers() - 1;
  Eigen::Map<Eigen::MatrixXd> w(params_.data() + offsets_[j], sizes_[j + 1], sizes_[j]);
  w.middleRows(first, count) *= gain;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  Cache cache;
  return forward(x, cache);
}

const Eigen::MatrixXd& Mlp::forward(const Eigen::MatrixXd& x, Cache& cache) const {
  if (x.rows() != input_size()) {
    throw ContractError("Mlp: input has " + std::to_string(x.rows()) + " rows, expected " +
                        std::to_string(input_size()));
  }
  cache.activations.resize(num_layers() + 1);
  cache.activations[0] = x;
  for (std::size_t j = 0; j < num_layers(); ++j) {
    auto& out = cache.activations[j + 1];
    out.noalias() = weight(j) * cache.activations[j];
    out.colwise() += bias(j);
    if (j + 1 < num_layers()) out = out.array().tanh().matrix();
  }
  return cache.activations.back();
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& d_output, Eigen::VectorXd& grad) const {
  if (grad.size() != params_.size()) throw ContractError("Mlp: gradient buffer has wrong size");
  Eigen::MatrixXd delta = d_output;
  for (std::size_t j = num_layers(); j-- > 0;) {
    const auto& input = cache.activations[j];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[j], sizes_[j + 1], sizes_[j]);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[j] + gw.size(), sizes_[j + 1]);
    gw.noalias() += delta * input.transpose();
    gb += delta.rowwise().sum();
    if (j == 0) break;
    Eigen::MatrixXd upstream = weight(j).transpose() * delta;
    delta = upstream.array() * (1.0 - input.array().square());
  }
}

}  // namespace echelon
