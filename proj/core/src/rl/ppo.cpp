#include "echelon/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "echelon/env/env.hpp"

namespace echelon {

void Trajectory::resize(std::size_t n) {
  observations.conservativeResize(obs_size, static_cast<Eigen::Index>(n));
  actions.resize(n * static_cast<std::size_t>(heads));
  log_probs.resize(n);
  values.resize(n);
  rewards.resize(n);
  dones.resize(n);
  advantages.resize(n);
  returns.resize(n);
}

Gae compute_gae(std::span<const double> rewards, std::span<const double> values,
                std::span<const std::uint8_t> dones, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) throw ContractError("compute_gae: length mismatch");
  Gae out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  double next_value = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    if (dones[i]) {
      running = 0.0;
      next_value = 0.0;
    }
    const double delta = rewards[i] + gamma * next_value - values[i];
    running = delta + gamma * lambda * running;
    out.advantages[i] = running;
    out.returns[i] = running + values[i];
    next_value = values[i];
  }
  return out;
}

void normalize_in_place(std::vector<double>& x) {
  if (x.size() < 2) return;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(x.size()));
  for (double& v : x) v = (v - mean) / (sd + 1e-8);
}

LossTerms ppo_loss(const PolicyNet& net, const Trajectory& traj, std::span<const double> advantages,
                   std::span<const std::size_t> indices, const PpoConfig& config, Eigen::VectorXd* grad) {
  const auto batch = static_cast<Eigen::Index>(indices.size());
  LossTerms terms;
  if (batch == 0) return terms;
  const int heads = net.heads();
  const int levels = net.levels();

  Eigen::MatrixXd obs(traj.obs_size, batch);
  for (Eigen::Index b = 0; b < batch; ++b) obs.col(b) = traj.observations.col(static_cast<Eigen::Index>(indices[b]));
  Mlp::Cache cache;
  const Eigen::MatrixXd& out = net.mlp().forward(obs, cache);
  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(out.rows(), batch);

  const double inv_b = 1.0 / static_cast<double>(batch);
  std::vector<Eigen::VectorXd> logp(heads);
  for (Eigen::Index b = 0; b < batch; ++b) {
    const std::size_t i = indices[b];
    double joint = 0.0;
    double entropy = 0.0;
    std::vector<double> head_entropy(heads);
    for (int h = 0; h < heads; ++h) {
      logp[h] = log_softmax(out.col(b).segment(static_cast<Eigen::Index>(h) * levels, levels));
      joint += logp[h][traj.actions[i * heads + h]];
      head_entropy[h] = -(logp[h].array().exp() * logp[h].array()).sum();
      entropy += head_entropy[h];
    }
    const double adv = advantages[i];
    const double ratio = std::exp(joint - traj.log_probs[i]);
    const double unclipped = ratio * adv;
    const double clipped = std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip) * adv;
    terms.policy -= std::min(unclipped, clipped) * inv_b;
    terms.entropy += entropy * inv_b;
    terms.approx_kl += (traj.log_probs[i] - joint) * inv_b;
    if (std::abs(ratio - 1.0) > config.clip) terms.clip_fraction += inv_b;
    const double err = out(net.value_row(), b) - traj.returns[i];
    terms.value += err * err * inv_b;

    if (grad) {
      const double g_logp = unclipped <= clipped ? -adv * ratio * inv_b : 0.0;
      for (int h = 0; h < heads; ++h) {
        const Eigen::ArrayXd p = logp[h].array().exp();
        auto d = d_out.col(b).segment(static_cast<Eigen::Index>(h) * levels, levels);
        d = (-g_logp * p + config.entropy_coeff * inv_b * p * (logp[h].array() + head_entropy[h])).matrix();
        d[traj.actions[i * heads + h]] += g_logp;
      }
      d_out(net.value_row(), b) = 2.0 * config.value_coeff * err * inv_b;
    }
  }
  terms.total = terms.policy + config.value_coeff * terms.value - config.entropy_coeff * terms.entropy;
  if (grad) {
    grad->setZero(static_cast<Eigen::Index>(net.num_params()));
    net.mlp().backward(cache, d_out, *grad);
  }
  return terms;
}

Adam::Adam(std::size_t num_params, const PpoConfig& config)
    : lr_(config.learning_rate), beta1_(config.adam_beta1), beta2_(config.adam_beta2), eps_(config.adam_eps),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params))) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

UpdateStats ppo_update(PolicyNet& net, Adam& adam, const Trajectory& traj, const PpoConfig& config,
                       std::mt19937_64& rng) {
  UpdateStats stats;
  const std::size_t n = traj.size();
  if (n == 0) return stats;
  std::vector<double> advantages = traj.advantages;
  normalize_in_place(advantages);

  const Eigen::VectorXd params_before = net.params();
  const Adam adam_before = adam;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto mb = static_cast<std::size_t>(std::max(1, config.minibatch_size));
  Eigen::VectorXd grad;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += mb) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(mb, n - start));
      const LossTerms terms = ppo_loss(net, traj, advantages, idx, config, &grad);
      const double norm = grad.norm();
      if (!std::isfinite(terms.total) || !std::isfinite(norm)) {
        net.params() = params_before;
        adam = adam_before;
        UpdateStats aborted;
        aborted.aborted = true;
        return aborted;
      }
      if (config.max_grad_norm > 0.0 && norm > config.max_grad_norm) grad *= config.max_grad_norm / norm;
      adam.step(net.params(), grad);
      stats.policy_loss += terms.policy;
      stats.value_loss += terms.value;
      stats.entropy += terms.entropy;
      stats.approx_kl += terms.approx_kl;
      stats.clip_fraction += terms.clip_fraction;
      stats.grad_norm += norm;
      ++stats.minibatches;
    }
  }
  const double k = 1.0 / std::max(1, stats.minibatches);
  stats.policy_loss *= k;
  stats.value_loss *= k;
  stats.entropy *= k;
  stats.approx_kl *= k;
  stats.clip_fraction *= k;
  stats.grad_norm *= k;
  return stats;
}

double gradient_check(const LossFunction& loss, const Eigen::VectorXd& params, double h) {
  Eigen::VectorXd analytic(params.size());
  loss(params, &analytic);
  Eigen::VectorXd probe = params;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + h;
    const double up = loss(probe, nullptr);
    probe[i] = params[i] - h;
    const double down = loss(probe, nullptr);
    probe[i] = params[i];
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
  }
  return worst;
}

}  // namespace echelon
