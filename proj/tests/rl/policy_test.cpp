#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "echelon/env/env.hpp"
#include "echelon/rl/agents.hpp"
#include "echelon/rl/mlp.hpp"
#include "echelon/rl/policy_net.hpp"
#include "echelon/rl/ppo.hpp"

namespace echelon {
namespace {

PolicyNet initialized(int input, std::vector<int> hidden, int heads, int levels, std::uint64_t seed) {
  PolicyNet net(input, hidden, heads, levels);
  std::mt19937_64 rng(seed);
  net.init(rng);
  return net;
}

// Index of output-layer bias `row` in the flat parameter vector.
Eigen::Index output_bias(const PolicyNet& net, int row) {
  return static_cast<Eigen::Index>(net.num_params()) - net.mlp().output_size() + row;
}

TEST(PolicyForward, ZeroWeightsGiveUniformHeadsAndZeroValue) {
  PolicyNet net(5, {8, 8}, 3, 21);
  net.params().setZero();
  const std::vector<double> obs{0.1, -0.4, 2.0, 0.0, 1.0};
  const auto out = policy_forward(net, obs);
  ASSERT_EQ(out.logits.size(), 3u);
  for (const auto& head : out.logits) {
    ASSERT_EQ(head.size(), 21u);
    const Eigen::VectorXd p = log_softmax(Eigen::Map<const Eigen::VectorXd>(head.data(), 21)).array().exp();
    for (double x : p) EXPECT_NEAR(x, 1.0 / 21.0, 1e-15);
  }
  EXPECT_EQ(out.value, 0.0);
}

TEST(PolicyForward, PureAndShapeChecked) {
  const auto net = initialized(4, {16, 16}, 2, 5, 3);
  const std::vector<double> obs{0.3, 0.1, -0.2, 0.9};
  const auto a = policy_forward(net, obs);
  const auto b = policy_forward(net, obs);
  EXPECT_EQ(a.logits, b.logits);
  EXPECT_EQ(a.value, b.value);
  const std::vector<double> wrong{0.3, 0.1};
  EXPECT_THROW(policy_forward(net, wrong), ContractError);
}

TEST(LogSoftmax, ShiftInvariantAndNormalized) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 3.0);
  Eigen::VectorXd z(21);
  for (auto& x : z) x = g(rng);
  const Eigen::VectorXd base = log_softmax(z);
  const Eigen::VectorXd shifted = log_softmax((z.array() + 123.5).matrix());
  for (Eigen::Index i = 0; i < z.size(); ++i) EXPECT_NEAR(base[i], shifted[i], 1e-12);
  EXPECT_NEAR(base.array().exp().sum(), 1.0, 1e-9);
  Eigen::Index arg_z = 0, arg_p = 0;
  z.maxCoeff(&arg_z);
  base.maxCoeff(&arg_p);
  EXPECT_EQ(arg_z, arg_p);

  Eigen::VectorXd huge(3);
  huge << 1000.0, 0.0, -1000.0;
  const Eigen::VectorXd lp = log_softmax(huge);
  EXPECT_TRUE(lp.allFinite());
  EXPECT_NEAR(lp[0], 0.0, 1e-12);
}

TEST(SampleHeads, DominantLogitIsNearlyAlwaysDrawn) {
  PolicyNet net(2, {4}, 2, 21);
  net.params().setZero();
  net.params()[output_bias(net, 7)] = 20.0;  // head 0, level 7
  const int draws = 10'000;
  const Eigen::MatrixXd obs = Eigen::MatrixXd::Zero(2, draws);
  std::mt19937_64 rng(1);
  const auto s = sample_heads(net, obs, rng, false);
  int hits = 0;
  for (int i = 0; i < draws; ++i) hits += s.actions[static_cast<std::size_t>(i) * 2] == 7;
  EXPECT_GT(static_cast<double>(hits) / draws, 0.999);
}

TEST(SampleHeads, UniformHeadEntropyMatchesLogLevels) {
  PolicyNet net(2, {4}, 1, 21);
  net.params().setZero();
  const int draws = 100'000;
  const Eigen::MatrixXd obs = Eigen::MatrixXd::Zero(2, draws);
  std::mt19937_64 rng(2);
  const auto s = sample_heads(net, obs, rng, false);
  std::vector<double> counts(21, 0.0);
  for (int a : s.actions) counts[static_cast<std::size_t>(a)] += 1.0;
  double entropy = 0.0;
  for (double c : counts) {
    if (c > 0) entropy -= c / draws * std::log(c / draws);
  }
  EXPECT_NEAR(entropy, std::log(21.0), 0.01 * std::log(21.0));
}

TEST(SampleHeads, JointLogProbIsSumOfHeads) {
  const auto net = initialized(3, {8}, 4, 6, 5);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd obs(3, 50);
  for (auto& x : obs.reshaped()) x = g(rng);
  const auto s = sample_heads(net, obs, rng, false);
  for (int b = 0; b < 50; ++b) {
    const std::vector<double> col(obs.col(b).data(), obs.col(b).data() + 3);
    const auto out = policy_forward(net, col);
    double joint = 0.0;
    for (int h = 0; h < 4; ++h) {
      const Eigen::VectorXd lp = log_softmax(Eigen::Map<const Eigen::VectorXd>(out.logits[h].data(), 6));
      joint += lp[s.actions[static_cast<std::size_t>(b) * 4 + h]];
    }
    EXPECT_EQ(s.log_probs[b], joint);
    EXPECT_EQ(s.values[b], out.value);
  }
}

TEST(SampleHeads, GreedyTakesArgmaxLowestOnTies) {
  PolicyNet net(2, {4}, 2, 5);
  net.params().setZero();
  net.params()[output_bias(net, 3)] = 1.0;
  std::mt19937_64 rng(0);
  const auto s = sample_heads(net, Eigen::MatrixXd::Zero(2, 1), rng, true);
  EXPECT_EQ(s.actions[0], 3);
  EXPECT_EQ(s.actions[1], 0);
}

TEST(Mlp, LinearNetQuadraticLossGradientIsExact) {
  Mlp mlp({3, 2});
  std::mt19937_64 rng(4);
  mlp.init(rng);
  Eigen::MatrixXd x(3, 6);
  std::normal_distribution<double> g;
  for (auto& v : x.reshaped()) v = g(rng);
  auto loss = [&](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    Mlp m = mlp;
    m.params() = p;
    Mlp::Cache cache;
    const Eigen::MatrixXd y = m.forward(x, cache);
    if (grad) {
      grad->setZero(p.size());
      m.backward(cache, y, *grad);
    }
    return 0.5 * y.squaredNorm();
  };
  EXPECT_LT(gradient_check(loss, mlp.params()), 1e-8);
}

TEST(Mlp, TanhNetGradientMatchesFiniteDifferences) {
  Mlp mlp({4, 6, 5, 3});
  std::mt19937_64 rng(6);
  mlp.init(rng);
  Eigen::MatrixXd x(4, 8);
  Eigen::MatrixXd target(3, 8);
  std::normal_distribution<double> g;
  for (auto& v : x.reshaped()) v = g(rng);
  for (auto& v : target.reshaped()) v = g(rng);
  auto loss = [&](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    Mlp m = mlp;
    m.params() = p;
    Mlp::Cache cache;
    const Eigen::MatrixXd r = m.forward(x, cache) - target;
    if (grad) {
      grad->setZero(p.size());
      m.backward(cache, r, *grad);
    }
    return 0.5 * r.squaredNorm();
  };
  EXPECT_LT(gradient_check(loss, mlp.params()), 1e-4);
}

TEST(Mlp, ZeroGradientPointReportsZero) {
  Mlp mlp({2, 3, 2});
  mlp.params().setZero();
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 4);
  auto loss = [&](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    Mlp m = mlp;
    m.params() = p;
    Mlp::Cache cache;
    const Eigen::MatrixXd y = m.forward(x, cache);
    if (grad) {
      grad->setZero(p.size());
      m.backward(cache, y, *grad);
    }
    return 0.5 * y.squaredNorm();
  };
  Eigen::VectorXd grad;
  loss(mlp.params(), &grad);
  EXPECT_EQ(grad.norm(), 0.0);
  EXPECT_LT(gradient_check(loss, mlp.params()), 1e-6);
}

TEST(PolicyNet, InitKeepsHeadsNearUniform) {
  const auto net = initialized(10, {128, 128}, 3, 21, 12);
  const std::vector<double> obs(10, 0.5);
  const auto out = policy_forward(net, obs);
  for (const auto& head : out.logits) {
    const Eigen::VectorXd p = log_softmax(Eigen::Map<const Eigen::VectorXd>(head.data(), 21)).array().exp();
    EXPECT_LT(p.maxCoeff() - p.minCoeff(), 0.01);
  }
}

}  // namespace
}  // namespace echelon
