#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fpnas/dist.hpp"
#include "fpnas/sampler.hpp"

namespace fpnas {

struct ImportanceWeights {
  std::vector<double> m;
  std::vector<double> likelihood_part;
  std::vector<double> cost_part;

  double sum() const {
    double s = 0.0;
    for (double v : m) s += v;
    return s;
  }
  double min() const { return *std::min_element(m.begin(), m.end()); }
  double max() const { return *std::max_element(m.begin(), m.end()); }
};

// m_k = softmax(loglik)_k - beta * C_k / sum(C). With sum(C) == 0 the cost
// term is dropped.
inline ImportanceWeights importance_weights(std::span<const double> val_log_likelihoods, std::span<const double> hinge_costs,
                                            double beta) {
  const std::size_t k = val_log_likelihoods.size();
  if (k == 0) throw ValidationError("importance weights need at least one sample");
  if (hinge_costs.size() != k) throw ValidationError("likelihood and cost lists differ in length");
  if (!(beta >= 0.0)) throw ValidationError("beta must be >= 0");
  for (std::size_t i = 0; i < k; ++i) {
    if (!std::isfinite(val_log_likelihoods[i]))
      throw RuntimeError("non-finite validation log-likelihood for sample " + std::to_string(i));
    if (!std::isfinite(hinge_costs[i]) || hinge_costs[i] < 0.0)
      throw RuntimeError("invalid hinge cost for sample " + std::to_string(i));
  }
  ImportanceWeights w;
  w.likelihood_part = detail::softmax(val_log_likelihoods);
  double total_cost = 0.0;
  for (double c : hinge_costs) total_cost += c;
  w.cost_part.assign(k, 0.0);
  if (total_cost > 0.0)
    for (std::size_t i = 0; i < k; ++i) w.cost_part[i] = beta * hinge_costs[i] / total_cost;
  w.m.resize(k);
  for (std::size_t i = 0; i < k; ++i) w.m[i] = w.likelihood_part[i] - w.cost_part[i];
  return w;
}

// sum_k m_k * grad(-log P(A_k)), reduced in sample order.
inline DistGradient alpha_gradient(const ArchDistribution& dist, const SampleBatch& batch, const ImportanceWeights& weights) {
  if (weights.m.size() != batch.size()) throw ValidationError("weights and batch differ in length");
  auto g = DistGradient::zeros_like(dist);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto gk = grad_neg_log_prob(dist, batch.architectures[k]);
    for (std::size_t b = 0; b < g.blocks.size(); ++b)
      for (std::size_t i = 0; i < g.blocks[b].size(); ++i) g.blocks[b][i] += weights.m[k] * gk.blocks[b][i];
  }
  return g;
}

struct AdamConfig {
  double lr = 0.016;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  Blocks first_moment;
  Blocks second_moment;
  std::uint64_t step = 0;

  static OptimizerState for_distribution(const ArchDistribution& d, AdamConfig config = {}) {
    OptimizerState s;
    s.config = config;
    for (const auto& b : d.blocks()) {
      s.first_moment.emplace_back(b.size(), 0.0);
      s.second_moment.emplace_back(b.size(), 0.0);
    }
    return s;
  }

  friend bool operator==(const OptimizerState& a, const OptimizerState& b) {
    return a.config.lr == b.config.lr && a.config.beta1 == b.config.beta1 && a.config.beta2 == b.config.beta2 &&
           a.config.eps == b.config.eps && a.first_moment == b.first_moment && a.second_moment == b.second_moment &&
           a.step == b.step;
  }
};

// Bias-corrected Adam with a constant step size.
inline void adam_step(OptimizerState& state, ArchDistribution& dist, const DistGradient& grad) {
  auto& logits = dist.blocks();
  if (grad.blocks.size() != logits.size() || state.first_moment.size() != logits.size())
    throw ValidationError("optimizer/gradient block count does not match the distribution");
  for (std::size_t b = 0; b < logits.size(); ++b)
    if (grad.blocks[b].size() != logits[b].size() || state.first_moment[b].size() != logits[b].size())
      throw ValidationError("optimizer/gradient block " + std::to_string(b) + " has the wrong size");

  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t b = 0; b < logits.size(); ++b) {
    auto& m = state.first_moment[b];
    auto& v = state.second_moment[b];
    for (std::size_t i = 0; i < logits[b].size(); ++i) {
      const double g = grad.blocks[b][i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      logits[b][i] -= c.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + c.eps);
    }
  }
}

// Monitoring form of the cost-aware loss: -mean loglik + beta * log(max(C, 1e-8)).
inline double cost_aware_loss(double mean_log_likelihood, double expected_hinge_cost, double beta) {
  return -mean_log_likelihood + beta * std::log(std::max(expected_hinge_cost, 1e-8));
}

}  // namespace fpnas
