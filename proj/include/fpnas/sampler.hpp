#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fpnas/dist.hpp"

namespace fpnas {

struct SamplingPolicy {
  enum class Kind : std::uint8_t { fixed, adaptive };

  Kind kind = Kind::adaptive;
  std::size_t k = 14;     // fixed
  double lambda = 0.25;   // adaptive
  std::size_t k_min = 1;
  std::size_t k_max = 64;

  static SamplingPolicy fixed(std::size_t k) {
    SamplingPolicy p;
    p.kind = Kind::fixed;
    p.k = k;
    return p;
  }
  static SamplingPolicy adaptive(double lambda, std::size_t k_max = 64, std::size_t k_min = 1) {
    SamplingPolicy p;
    p.kind = Kind::adaptive;
    p.lambda = lambda;
    p.k_min = k_min;
    p.k_max = k_max;
    return p;
  }

  void validate() const {
    if (kind == Kind::fixed && k < 1) throw ValidationError("fixed sampling needs k >= 1");
    if (kind == Kind::adaptive && !(lambda > 0.0)) throw ValidationError("adaptive sampling needs lambda > 0");
    if (k_min < 1 || k_max < k_min) throw ValidationError("sampling bounds need 1 <= k_min <= k_max");
  }
};

// fixed: K; adaptive: clamp(floor(lambda * H), k_min, k_max).
inline std::size_t sample_count(const SamplingPolicy& policy, double entropy_nats) {
  if (policy.kind == SamplingPolicy::Kind::fixed) return policy.k;
  const double raw = std::floor(policy.lambda * std::max(0.0, entropy_nats));
  const double clamped = std::clamp(raw, static_cast<double>(policy.k_min), static_cast<double>(policy.k_max));
  return static_cast<std::size_t>(clamped);
}

struct SampleBatch {
  std::vector<Architecture> architectures;
  std::vector<double> log_probs;
  std::vector<double> flops;
  std::vector<double> hinge_costs;
  std::vector<double> val_log_likelihoods;

  std::size_t size() const { return architectures.size(); }
};

// Draws K i.i.d. architectures; duplicates are kept.
inline SampleBatch draw_batch(const ArchDistribution& dist, const SamplingPolicy& policy, Rng& rng,
                              std::uint64_t* cumulative_samples = nullptr) {
  const std::size_t k = sample_count(policy, entropy(dist));
  SampleBatch batch;
  batch.architectures.reserve(k);
  batch.log_probs.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto s = sample(dist, rng);
    batch.architectures.push_back(std::move(s.arch));
    batch.log_probs.push_back(s.log_prob);
  }
  if (cumulative_samples) *cumulative_samples += k;
  return batch;
}

}  // namespace fpnas
