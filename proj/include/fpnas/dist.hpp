#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fpnas/error.hpp"
#include "fpnas/random.hpp"
#include "fpnas/space.hpp"

namespace fpnas {

enum class DistMode : std::uint8_t { joint, factorized };

inline std::string_view mode_name(DistMode m) { return m == DistMode::joint ? "joint" : "factorized"; }

// Logit blocks, one softmax per block. Shared by distributions, gradients and
// optimizer moments.
using Blocks = std::vector<std::vector<double>>;

namespace detail {

inline double log_sum_exp(std::span<const double> x) {
  const double mx = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - mx);
  return mx + std::log(s);
}

inline std::vector<double> softmax(std::span<const double> x) {
  const double lse = log_sum_exp(x);
  std::vector<double> p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = std::exp(x[i] - lse);
  return p;
}

inline double categorical_entropy(std::span<const double> logits) {
  const double lse = log_sum_exp(logits);
  double h = 0.0;
  for (double v : logits) {
    const double lp = v - lse;
    const double p = std::exp(lp);
    if (p > 0.0) h -= p * lp;
  }
  return std::max(0.0, h);
}

inline std::size_t argmax_lowest(std::span<const double> x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] > x[best]) best = i;
  return best;
}

}  // namespace detail

// P(A | alpha): independent positions; within a position either one joint
// categorical over the variable tuple, or one categorical per variable.
class ArchDistribution {
 public:
  ArchDistribution() = default;

  static ArchDistribution uniform(Shape shape, DistMode mode) {
    ArchDistribution d;
    d.mode_ = mode;
    d.shape_ = std::move(shape);
    for (const auto& row : d.shape_) {
      if (row.empty()) throw ValidationError("every position needs at least one variable");
      for (auto n : row)
        if (n == 0) throw ValidationError("empty choice set in distribution shape");
      if (mode == DistMode::joint) {
        std::size_t n = 1;
        for (auto c : row) n *= c;
        d.blocks_.emplace_back(n, 0.0);
      } else {
        for (auto c : row) d.blocks_.emplace_back(c, 0.0);
      }
    }
    d.index_blocks();
    return d;
  }

  static ArchDistribution uniform(const SearchSpace& space, DistMode mode) { return uniform(space.shape(), mode); }

  static ArchDistribution from_blocks(Shape shape, DistMode mode, Blocks blocks) {
    auto d = uniform(std::move(shape), mode);
    if (blocks.size() != d.blocks_.size()) throw ValidationError("logit block count does not match the shape");
    for (std::size_t b = 0; b < blocks.size(); ++b)
      if (blocks[b].size() != d.blocks_[b].size()) throw ValidationError("logit block " + std::to_string(b) + " has the wrong size");
    d.blocks_ = std::move(blocks);
    return d;
  }

  DistMode mode() const { return mode_; }
  const Shape& shape() const { return shape_; }
  std::size_t num_positions() const { return shape_.size(); }
  const Blocks& blocks() const { return blocks_; }
  Blocks& blocks() { return blocks_; }
  std::size_t num_blocks() const { return blocks_.size(); }
  // First block of position l (joint: the only one).
  std::size_t block_of(std::size_t l) const { return first_block_[l]; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& b : blocks_) n += b.size();
    return n;
  }

  std::vector<double> probabilities(std::size_t block) const { return detail::softmax(blocks_.at(block)); }

  // Row-major linear index of a variable tuple (first variable slowest).
  std::size_t linear_index(std::size_t l, std::span<const std::uint32_t> tuple) const {
    std::size_t idx = 0;
    for (std::size_t m = 0; m < tuple.size(); ++m) idx = idx * shape_[l][m] + tuple[m];
    return idx;
  }

  std::vector<std::uint32_t> tuple_of(std::size_t l, std::size_t idx) const {
    std::vector<std::uint32_t> t(shape_[l].size());
    for (std::size_t m = t.size(); m-- > 0;) {
      t[m] = static_cast<std::uint32_t>(idx % shape_[l][m]);
      idx /= shape_[l][m];
    }
    return t;
  }

  friend bool operator==(const ArchDistribution&, const ArchDistribution&) = default;

 private:
  void index_blocks() {
    first_block_.clear();
    std::size_t b = 0;
    for (const auto& row : shape_) {
      first_block_.push_back(b);
      b += mode_ == DistMode::joint ? 1 : row.size();
    }
  }

  DistMode mode_ = DistMode::joint;
  Shape shape_;
  Blocks blocks_;
  std::vector<std::size_t> first_block_;
};

// Gradient of a scalar w.r.t. the logits; same block layout as the distribution.
struct DistGradient {
  Blocks blocks;

  static DistGradient zeros_like(const ArchDistribution& d) {
    DistGradient g;
    for (const auto& b : d.blocks()) g.blocks.emplace_back(b.size(), 0.0);
    return g;
  }
};

inline void check_arch_shape(const ArchDistribution& d, const Architecture& a) {
  if (a.choices.size() != d.num_positions())
    throw ValidationError("architecture has " + std::to_string(a.choices.size()) + " positions, distribution has " +
                          std::to_string(d.num_positions()));
  for (std::size_t l = 0; l < a.choices.size(); ++l) {
    if (a.choices[l].size() != d.shape()[l].size())
      throw ValidationError("position " + std::to_string(l) + " has the wrong number of variables");
    for (std::size_t m = 0; m < a.choices[l].size(); ++m)
      if (a.choices[l][m] >= d.shape()[l][m]) throw ValidationError("index out of range at position " + std::to_string(l));
  }
}

// Sum of block entropies in nats; equals the entropy of the full product law.
inline double entropy(const ArchDistribution& d) {
  double h = 0.0;
  for (const auto& b : d.blocks()) h += detail::categorical_entropy(b);
  return h;
}

inline double log_prob(const ArchDistribution& d, const Architecture& a) {
  check_arch_shape(d, a);
  double lp = 0.0;
  for (std::size_t l = 0; l < d.num_positions(); ++l) {
    const std::size_t b0 = d.block_of(l);
    if (d.mode() == DistMode::joint) {
      const auto& blk = d.blocks()[b0];
      lp += blk[d.linear_index(l, a.choices[l])] - detail::log_sum_exp(blk);
    } else {
      for (std::size_t m = 0; m < a.choices[l].size(); ++m) {
        const auto& blk = d.blocks()[b0 + m];
        lp += blk[a.choices[l][m]] - detail::log_sum_exp(blk);
      }
    }
  }
  return lp;
}

struct ArchSample {
  Architecture arch;
  double log_prob = 0.0;
};

namespace detail {

inline std::size_t inverse_cdf(const std::vector<double>& p, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  // u landed in the rounding gap above the last partial sum
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i] > 0.0) return i;
  return p.size() - 1;
}

}  // namespace detail

// One uniform draw per block, blocks visited in order.
inline ArchSample sample(const ArchDistribution& d, Rng& rng) {
  ArchSample s;
  s.arch.choices.resize(d.num_positions());
  for (std::size_t l = 0; l < d.num_positions(); ++l) {
    const std::size_t b0 = d.block_of(l);
    if (d.mode() == DistMode::joint) {
      const auto idx = detail::inverse_cdf(d.probabilities(b0), rng.uniform());
      s.arch.choices[l] = d.tuple_of(l, idx);
    } else {
      auto& t = s.arch.choices[l];
      for (std::size_t m = 0; m < d.shape()[l].size(); ++m)
        t.push_back(static_cast<std::uint32_t>(detail::inverse_cdf(d.probabilities(b0 + m), rng.uniform())));
    }
  }
  s.log_prob = log_prob(d, s.arch);
  return s;
}

// d(-log P(arch)) / d logits = softmax - onehot, per block.
inline DistGradient grad_neg_log_prob(const ArchDistribution& d, const Architecture& a) {
  check_arch_shape(d, a);
  DistGradient g;
  g.blocks.reserve(d.num_blocks());
  for (std::size_t l = 0; l < d.num_positions(); ++l) {
    const std::size_t b0 = d.block_of(l);
    if (d.mode() == DistMode::joint) {
      auto p = d.probabilities(b0);
      p[d.linear_index(l, a.choices[l])] -= 1.0;
      g.blocks.push_back(std::move(p));
    } else {
      for (std::size_t m = 0; m < a.choices[l].size(); ++m) {
        auto p = d.probabilities(b0 + m);
        p[a.choices[l][m]] -= 1.0;
        g.blocks.push_back(std::move(p));
      }
    }
  }
  return g;
}

inline constexpr std::size_t kDefaultJointCap = 1'000'000;

// Joint logit of tuple t = sum_m log P_fd(t_m), mean-centred per block. The
// joint law equals the product of the factorized marginals.
inline ArchDistribution factorized_to_joint(const ArchDistribution& d, std::size_t cap = kDefaultJointCap) {
  if (d.mode() != DistMode::factorized) throw ValidationError("factorized_to_joint needs a factorized distribution");
  Blocks joint;
  for (std::size_t l = 0; l < d.num_positions(); ++l) {
    const auto& row = d.shape()[l];
    std::size_t n = 1;
    for (auto c : row) {
      if (n > cap / c) {
        throw RuntimeError("joint block at position " + std::to_string(l) + " exceeds the cardinality cap of " +
                           std::to_string(cap) + "; keep this space factorized");
      }
      n *= c;
    }
    std::vector<std::vector<double>> logp;
    for (std::size_t m = 0; m < row.size(); ++m) {
      const auto& blk = d.blocks()[d.block_of(l) + m];
      const double lse = detail::log_sum_exp(blk);
      auto& lp = logp.emplace_back();
      for (double v : blk) lp.push_back(v - lse);
    }
    std::vector<double> out(n, 0.0);
    // Odometer over tuples in row-major order.
    std::vector<std::size_t> t(row.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t m = 0; m < row.size(); ++m) s += logp[m][t[m]];
      out[i] = s;
      for (std::size_t m = row.size(); m-- > 0;) {
        if (++t[m] < row[m]) break;
        t[m] = 0;
      }
    }
    double mean = 0.0;
    for (double v : out) mean += v;
    mean /= static_cast<double>(n);
    if (std::isfinite(mean))
      for (double& v : out) v -= mean;
    joint.push_back(std::move(out));
  }
  return ArchDistribution::from_blocks(d.shape(), DistMode::joint, std::move(joint));
}

// Per-variable marginal probabilities of each position, in either mode.
inline std::vector<std::vector<std::vector<double>>> marginals(const ArchDistribution& d) {
  std::vector<std::vector<std::vector<double>>> out(d.num_positions());
  for (std::size_t l = 0; l < d.num_positions(); ++l) {
    const auto& row = d.shape()[l];
    if (d.mode() == DistMode::factorized) {
      for (std::size_t m = 0; m < row.size(); ++m) out[l].push_back(d.probabilities(d.block_of(l) + m));
      continue;
    }
    for (auto c : row) out[l].emplace_back(c, 0.0);
    const auto p = d.probabilities(d.block_of(l));
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto t = d.tuple_of(l, i);
      for (std::size_t m = 0; m < row.size(); ++m) out[l][m][t[m]] += p[i];
    }
  }
  return out;
}

// Per-position argmax (per-variable argmax when factorized); ties go to the
// lowest index.
inline Architecture most_probable_architecture(const ArchDistribution& d) {
  Architecture a;
  a.choices.resize(d.num_positions());
  for (std::size_t l = 0; l < d.num_positions(); ++l) {
    const std::size_t b0 = d.block_of(l);
    if (d.mode() == DistMode::joint) {
      a.choices[l] = d.tuple_of(l, detail::argmax_lowest(d.blocks()[b0]));
    } else {
      for (std::size_t m = 0; m < d.shape()[l].size(); ++m)
        a.choices[l].push_back(static_cast<std::uint32_t>(detail::argmax_lowest(d.blocks()[b0 + m])));
    }
  }
  return a;
}

inline Architecture most_probable_architecture(const SearchSpace& space, const ArchDistribution& d) {
  if (space.shape() != d.shape()) throw ValidationError("distribution is not defined over this space");
  return most_probable_architecture(d);
}

}  // namespace fpnas
