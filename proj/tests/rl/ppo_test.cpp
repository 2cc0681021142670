#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "echelon/rl/agents.hpp"
#include "echelon/rl/policy_net.hpp"
#include "echelon/rl/ppo.hpp"

namespace echelon {
namespace {

TEST(Gae, LambdaZeroIsOneStepTd) {
  const std::vector<double> r{1.0, -2.0, 0.5, 3.0};
  const std::vector<double> v{0.2, 0.7, -0.1, 1.5};
  const std::vector<std::uint8_t> d{0, 0, 0, 1};
  const double gamma = 0.9;
  const auto g = compute_gae(r, v, d, gamma, 0.0);
  for (int t = 0; t < 3; ++t) EXPECT_EQ(g.advantages[t], r[t] + gamma * v[t + 1] - v[t]);
  EXPECT_EQ(g.advantages[3], r[3] - v[3]);
  for (int t = 0; t < 4; ++t) EXPECT_EQ(g.returns[t], g.advantages[t] + v[t]);
}

TEST(Gae, LambdaOneZeroValuesIsRewardToGo) {
  const std::vector<double> r{1.0, 2.0, 3.0, 4.0};
  const std::vector<double> v(4, 0.0);
  const std::vector<std::uint8_t> d{0, 0, 0, 1};
  const auto g = compute_gae(r, v, d, 1.0, 1.0);
  EXPECT_EQ(g.advantages, (std::vector<double>{10.0, 9.0, 7.0, 4.0}));
}

TEST(Gae, HandWorkedThreeStepEpisode) {
  const std::vector<double> r{1.0, 2.0, 3.0};
  const std::vector<double> v{0.5, 0.5, 0.5};
  const std::vector<std::uint8_t> d{0, 0, 1};
  const auto g = compute_gae(r, v, d, 0.9, 0.8);
  // delta = 0.95, 1.95, 2.5; A_2 = 2.5, A_1 = 1.95 + 0.72 * 2.5, A_0 = 0.95 + 0.72 * A_1.
  EXPECT_NEAR(g.advantages[2], 2.5, 1e-12);
  EXPECT_NEAR(g.advantages[1], 3.75, 1e-12);
  EXPECT_NEAR(g.advantages[0], 3.65, 1e-12);
  EXPECT_NEAR(g.returns[0], 4.15, 1e-12);
  EXPECT_NEAR(g.returns[1], 4.25, 1e-12);
  EXPECT_NEAR(g.returns[2], 3.0, 1e-12);
}

TEST(Gae, EpisodeBoundaryResetsRecursion) {
  const std::vector<double> r{1.0, 2.0, 3.0, 1.0, 2.0, 3.0};
  const std::vector<double> v(6, 0.5);
  const std::vector<std::uint8_t> d{0, 0, 1, 0, 0, 1};
  const auto g = compute_gae(r, v, d, 0.9, 0.8);
  for (int t = 0; t < 3; ++t) EXPECT_EQ(g.advantages[t], g.advantages[t + 3]);
}

TEST(Normalize, ZeroMeanUnitVariance) {
  std::vector<double> x{1.0, 4.0, -2.0, 7.5, 0.0};
  normalize_in_place(x);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / 5.0;
  double var = 0.0;
  for (double a : x) var += (a - mean) * (a - mean);
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(var / 5.0, 1.0, 1e-7);
  std::vector<double> one{3.0};
  normalize_in_place(one);
  EXPECT_EQ(one[0], 3.0);
}

// A batch collected from `net` itself, so every stored log-prob is the
// collection-time one and the PPO ratio starts at exactly 1.
struct Batch {
  Trajectory traj;
  std::vector<std::size_t> indices;
};

Batch collect(const PolicyNet& net, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Batch b{Trajectory(net.input_size(), net.heads()), {}};
  b.traj.resize(static_cast<std::size_t>(n));
  for (auto& x : b.traj.observations.reshaped()) x = g(rng);
  const auto s = sample_heads(net, b.traj.observations, rng, false);
  b.traj.actions = s.actions;
  b.traj.log_probs = s.log_probs;
  b.traj.values = s.values;
  for (int i = 0; i < n; ++i) {
    b.traj.advantages[i] = g(rng);
    b.traj.returns[i] = g(rng);
    b.indices.push_back(static_cast<std::size_t>(i));
  }
  return b;
}

PolicyNet tiny_net(std::uint64_t seed, int heads = 1, int levels = 2) {
  PolicyNet net(2, {4}, heads, levels);
  std::mt19937_64 rng(seed);
  net.init(rng);
  // Push logits away from uniform so the test exercises non-trivial softmax.
  net.params() *= 4.0;
  return net;
}

TEST(PpoLoss, RatioIsOneAtCollectionParameters) {
  const auto net = tiny_net(1, 3, 4);
  const auto b = collect(net, 16, 2);
  PpoConfig cfg;
  const auto t = ppo_loss(net, b.traj, b.traj.advantages, b.indices, cfg, nullptr);
  EXPECT_NEAR(t.approx_kl, 0.0, 1e-15);
  EXPECT_EQ(t.clip_fraction, 0.0);
  const double mean_adv = std::accumulate(b.traj.advantages.begin(), b.traj.advantages.end(), 0.0) / 16.0;
  EXPECT_NEAR(t.policy, -mean_adv, 1e-12);
}

TEST(PpoLoss, ZeroClipAtOldParametersIsVanillaPolicyGradient) {
  const auto net = tiny_net(3, 2, 3);
  const auto b = collect(net, 8, 4);
  PpoConfig cfg;
  cfg.clip = 0.0;
  cfg.value_coeff = 0.0;
  cfg.entropy_coeff = 0.0;
  Eigen::VectorXd grad;
  ppo_loss(net, b.traj, b.traj.advantages, b.indices, cfg, &grad);

  // -mean_i A_i * log pi(a_i | s_i), differentiated numerically.
  auto pg = [&](const Eigen::VectorXd& p) {
    PolicyNet m = net;
    m.params() = p;
    double total = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
      const auto col = b.traj.observations.col(static_cast<Eigen::Index>(i));
      const auto out = policy_forward(m, std::span<const double>(col.data(), 2));
      for (int h = 0; h < 2; ++h) {
        const Eigen::VectorXd lp = log_softmax(Eigen::Map<const Eigen::VectorXd>(out.logits[h].data(), 3));
        total -= b.traj.advantages[i] * lp[b.traj.actions[i * 2 + h]];
      }
    }
    return total / 8.0;
  };
  const double h = 1e-6;
  for (Eigen::Index j = 0; j < grad.size(); ++j) {
    Eigen::VectorXd up = net.params(), down = net.params();
    up[j] += h;
    down[j] -= h;
    EXPECT_NEAR(grad[j], (pg(up) - pg(down)) / (2 * h), 1e-7) << "parameter " << j;
  }
}

TEST(PpoLoss, ZeroAdvantagesLeaveOnlyTheEntropyGradient) {
  const auto net = tiny_net(5, 2, 4);
  auto b = collect(net, 12, 6);
  std::fill(b.traj.advantages.begin(), b.traj.advantages.end(), 0.0);
  PpoConfig cfg;
  cfg.value_coeff = 0.0;
  cfg.entropy_coeff = 0.0;
  Eigen::VectorXd none, unit, scaled;
  ppo_loss(net, b.traj, b.traj.advantages, b.indices, cfg, &none);
  EXPECT_EQ(none.norm(), 0.0);
  cfg.entropy_coeff = 1.0;
  ppo_loss(net, b.traj, b.traj.advantages, b.indices, cfg, &unit);
  cfg.entropy_coeff = 0.01;
  ppo_loss(net, b.traj, b.traj.advantages, b.indices, cfg, &scaled);
  EXPECT_GT(unit.norm(), 0.0);
  for (Eigen::Index j = 0; j < unit.size(); ++j) EXPECT_NEAR(scaled[j], 0.01 * unit[j], 1e-15);
}

TEST(PpoLoss, FullLossGradientMatchesFiniteDifferences) {
  const auto net = tiny_net(7);
  auto b = collect(net, 8, 8);
  // Perturb stored log-probs so some samples sit inside the clip window and
  // some outside, keeping every ratio clear of the 1 +- clip kinks.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> shift(-0.6, 0.6);
  PpoConfig cfg;
  for (auto& lp : b.traj.log_probs) {
    double s = 0.0;
    do {
      s = shift(rng);
    } while (std::abs(std::abs(s) - std::log1p(cfg.clip)) < 0.05 || std::abs(std::abs(s) - -std::log1p(-cfg.clip)) < 0.05);
    lp += s;
  }
  auto loss = [&](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    PolicyNet m = net;
    m.params() = p;
    return ppo_loss(m, b.traj, b.traj.advantages, b.indices, cfg, grad).total;
  };
  const auto terms = ppo_loss(net, b.traj, b.traj.advantages, b.indices, cfg, nullptr);
  EXPECT_GT(terms.clip_fraction, 0.0);
  EXPECT_LT(terms.clip_fraction, 1.0);
  EXPECT_LT(gradient_check(loss, net.params()), 1e-4);
}

TEST(PpoLoss, MultiHeadTwoLayerGradientMatchesFiniteDifferences) {
  PolicyNet net(3, {6, 5}, 3, 4);
  std::mt19937_64 rng(10);
  net.init(rng);
  net.params() *= 3.0;
  const auto b = collect(net, 10, 11);
  PpoConfig cfg;
  cfg.entropy_coeff = 0.1;
  auto loss = [&](const Eigen::VectorXd& p, Eigen::VectorXd* grad) {
    PolicyNet m = net;
    m.params() = p;
    return ppo_loss(m, b.traj, b.traj.advantages, b.indices, cfg, grad).total;
  };
  EXPECT_LT(gradient_check(loss, net.params()), 1e-4);
}

TEST(PpoUpdate, ImprovesSurrogateOnFixedBatch) {
  auto net = tiny_net(12, 1, 3);
  auto b = collect(net, 64, 13);
  PpoConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.minibatch_size = 16;
  std::vector<double> adv = b.traj.advantages;
  normalize_in_place(adv);
  const auto before = ppo_loss(net, b.traj, adv, b.indices, cfg, nullptr);
  Adam adam(net.num_params(), cfg);
  std::mt19937_64 rng(14);
  const auto stats = ppo_update(net, adam, b.traj, cfg, rng);
  EXPECT_FALSE(stats.aborted);
  EXPECT_EQ(stats.minibatches, cfg.epochs * 4);
  const auto after = ppo_loss(net, b.traj, adv, b.indices, cfg, nullptr);
  EXPECT_LT(after.total, before.total);
}

TEST(PpoUpdate, NonFiniteLossRollsBack) {
  auto net = tiny_net(15, 1, 3);
  auto b = collect(net, 16, 16);
  b.traj.returns[3] = std::numeric_limits<double>::quiet_NaN();
  PpoConfig cfg;
  Adam adam(net.num_params(), cfg);
  const Eigen::VectorXd before = net.params();
  std::mt19937_64 rng(17);
  const auto stats = ppo_update(net, adam, b.traj, cfg, rng);
  EXPECT_TRUE(stats.aborted);
  EXPECT_EQ(net.params(), before);
  EXPECT_EQ(adam.steps(), 0);
}

TEST(Adam, FirstStepMovesEachParameterByLearningRate) {
  PpoConfig cfg;
  cfg.learning_rate = 0.1;
  Adam adam(3, cfg);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd g(3);
  g << 2.0, -0.5, 0.0;
  adam.step(p, g);
  EXPECT_NEAR(p[0], -0.1, 1e-8);
  EXPECT_NEAR(p[1], 0.1, 1e-8);
  EXPECT_EQ(p[2], 0.0);
  EXPECT_EQ(adam.steps(), 1);
}

}  // namespace
}  // namespace echelon
