#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <random>
#include <vector>

namespace echelon {

// Fully connected network with tanh hidden layers and a linear output layer.
//
// All weights live in one flat parameter vector so optimizers, checkpoints and
// finite-difference checks can treat the network as a point in R^P. Layer j
// stores W_j (out x in, column-major) followed by b_j. Batches are column
// matrices: one sample per column.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, then every layer's output
  };

  Mlp() = default;
  explicit Mlp(std::vector<int> sizes);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // Glorot-uniform weights, zero biases.
  void init(std::mt19937_64& rng);
  // Multiplies output-layer rows [first, first + count) by gain.
  void scale_output_rows(int first, int count, double gain);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  const Eigen::MatrixXd& forward(const Eigen::MatrixXd& x, Cache& cache) const;
  // Accumulates dL/dparams into grad given dL/doutput for the cached batch.
  void backward(const Cache& cache, const Eigen::MatrixXd& d_output, Eigen::VectorXd& grad) const;

 private:
  using MatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<const Eigen::VectorXd>;

  MatMap weight(std::size_t layer) const;
  VecMap bias(std::size_t layer) const;

  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;  // start of W_j in params_
  Eigen::VectorXd params_;
};

}  // namespace echelon
