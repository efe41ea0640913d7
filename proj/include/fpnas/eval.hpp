#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fpnas/dist.hpp"
#include "fpnas/random.hpp"
#include "fpnas/space.hpp"

namespace fpnas {

// What the search loop needs from an architecture evaluator.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  virtual std::string kind() const = 0;

  // Called once before the first step with the total number of steps.
  virtual void begin(std::uint64_t /*total_steps*/) {}

  // Updates shared weights from the sampled architectures; returns the mean
  // train log-likelihood. Oracles have no weights.
  virtual double train_step(std::span<const Architecture> /*archs*/, std::uint64_t /*step*/) { return 0.0; }

  // Mean per-example validation log-likelihood of each architecture. Must not
  // change evaluator state.
  virtual std::vector<double> validate(std::span<const Architecture> archs, std::uint64_t step) const = 0;

  // Reported quality of a final architecture (higher is better).
  virtual double score(const Architecture& arch) const = 0;

  virtual json state() const { return json::object(); }
  virtual void load_state(const json& /*state*/) {}
};

struct OracleConfig {
  std::uint64_t seed = 0;
  double tau = 1.0;             // log-likelihood = score / tau
  double additive_scale = 1.0;  // per-choice utilities ~ U(0, additive_scale)
  double pair_scale = 0.0;      // within-position pairwise terms ~ U(-1, 1) * pair_scale
  double chain_scale = 0.0;     // terms between first variables of adjacent positions
  double synergy = 0.0;         // bonus for one hidden pair of weak choices, see below
};

// Seeded synthetic objective over architectures. Raw value = additive
// utilities + pairwise interactions + synergy; score() rescales it so that the
// worst architecture maps to 0 and the best to 1.
//
// Synergy: at each position with two or more variables, the weakest choices of
// the last two variables (expansion and channel in MBConv order) receive a
// joint bonus of synergy * (spread_a + spread_b). For synergy > 1 that pair is
// the best tuple of the position while each choice alone still looks poor when
// averaged over the other variable.
class TabularOracle : public Evaluator {
 public:
  TabularOracle(Shape shape, OracleConfig config) : shape_(std::move(shape)), config_(config) {
    if (!(config_.tau > 0.0)) throw ValidationError("oracle tau must be positive");
    Rng rng(config_.seed);
    const std::size_t L = shape_.size();
    additive_.resize(L);
    pairs_.resize(L);
    synergy_.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
      for (auto n : shape_[l]) {
        auto& u = additive_[l].emplace_back(n);
        for (auto& x : u) x = config_.additive_scale * rng.uniform();
      }
    }
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t M = shape_[l].size();
      for (std::size_t a = 0; a < M; ++a)
        for (std::size_t b = a + 1; b < M; ++b) {
          Pair p{a, b, std::vector<double>(shape_[l][a] * shape_[l][b], 0.0)};
          if (config_.pair_scale != 0.0)
            for (auto& x : p.table) x = config_.pair_scale * (2.0 * rng.uniform() - 1.0);
          pairs_[l].push_back(std::move(p));
        }
    }
    chain_.resize(L > 0 ? L - 1 : 0);
    for (std::size_t l = 0; l + 1 < L; ++l) {
      chain_[l].assign(shape_[l][0] * shape_[l + 1][0], 0.0);
      if (config_.chain_scale != 0.0)
        for (auto& x : chain_[l]) x = config_.chain_scale * (2.0 * rng.uniform() - 1.0);
    }
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t M = shape_[l].size();
      if (M < 2 || config_.synergy == 0.0) continue;
      const auto& ua = additive_[l][M - 2];
      const auto& ub = additive_[l][M - 1];
      if (ua.size() < 2 || ub.size() < 2) continue;
      const auto [amin, amax] = std::minmax_element(ua.begin(), ua.end());
      const auto [bmin, bmax] = std::minmax_element(ub.begin(), ub.end());
      synergy_[l] = Synergy{static_cast<std::size_t>(amin - ua.begin()), static_cast<std::size_t>(bmin - ub.begin()),
                            config_.synergy * ((*amax - *amin) + (*bmax - *bmin))};
    }
    const auto lo = extreme(false);
    const auto hi = extreme(true);
    min_raw_ = lo.first;
    max_raw_ = hi.first;
    argmax_ = hi.second;
  }

  TabularOracle(const SearchSpace& space, OracleConfig config) : TabularOracle(space.shape(), config) {}

  std::string kind() const override { return "oracle"; }

  double raw_score(const Architecture& a) const {
    double s = 0.0;
    for (std::size_t l = 0; l < shape_.size(); ++l) {
      s += local_score(l, a.choices[l]);
      if (l + 1 < shape_.size()) s += chain_[l][a.choices[l][0] * shape_[l + 1][0] + a.choices[l + 1][0]];
    }
    return s;
  }

  double score(const Architecture& a) const override {
    check(a);
    if (max_raw_ == min_raw_) return 1.0;
    return (raw_score(a) - min_raw_) / (max_raw_ - min_raw_);
  }

  double log_likelihood(const Architecture& a) const { return score(a) / config_.tau; }

  std::vector<double> validate(std::span<const Architecture> archs, std::uint64_t) const override {
    std::vector<double> out;
    out.reserve(archs.size());
    for (const auto& a : archs) out.push_back(log_likelihood(a));
    return out;
  }

  // Exact best architecture (dynamic programming over the position chain).
  const Architecture& best_architecture() const { return argmax_; }
  double min_raw() const { return min_raw_; }
  double max_raw() const { return max_raw_; }
  const Shape& shape() const { return shape_; }
  const OracleConfig& config() const { return config_; }

  // Additive utility of choice c for variable m at position l.
  double utility(std::size_t l, std::size_t m, std::size_t c) const { return additive_[l][m][c]; }

 private:
  struct Pair {
    std::size_t a, b;
    std::vector<double> table;
  };
  struct Synergy {
    std::size_t a_choice = 0, b_choice = 0;
    double bonus = 0.0;
  };

  void check(const Architecture& a) const {
    if (a.choices.size() != shape_.size()) throw ValidationError("architecture does not match the oracle's space");
    for (std::size_t l = 0; l < shape_.size(); ++l) {
      if (a.choices[l].size() != shape_[l].size()) throw ValidationError("architecture does not match the oracle's space");
      for (std::size_t m = 0; m < shape_[l].size(); ++m)
        if (a.choices[l][m] >= shape_[l][m]) throw ValidationError("index out of range at position " + std::to_string(l));
    }
  }

  double local_score(std::size_t l, std::span<const std::uint32_t> t) const {
    double s = 0.0;
    for (std::size_t m = 0; m < t.size(); ++m) s += additive_[l][m][t[m]];
    for (const auto& p : pairs_[l]) s += p.table[t[p.a] * shape_[l][p.b] + t[p.b]];
    const std::size_t M = t.size();
    if (synergy_[l].bonus != 0.0 && t[M - 2] == synergy_[l].a_choice && t[M - 1] == synergy_[l].b_choice)
      s += synergy_[l].bonus;
    return s;
  }

  // Max (or min) raw score and its architecture. The chain only couples the
  // first variables, so each position reduces to a table over that variable.
  std::pair<double, Architecture> extreme(bool maximize) const {
    const std::size_t L = shape_.size();
    const double worst = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    auto better = [&](double x, double y) { return maximize ? x > y : x < y; };
    std::vector<std::vector<double>> best_local(L);
    std::vector<std::vector<std::vector<std::uint32_t>>> best_tuple(L);
    for (std::size_t l = 0; l < L; ++l) {
      const auto& row = shape_[l];
      best_local[l].assign(row[0], worst);
      best_tuple[l].assign(row[0], {});
      std::vector<std::uint32_t> t(row.size(), 0);
      while (true) {
        const double s = local_score(l, t);
        if (better(s, best_local[l][t[0]])) {
          best_local[l][t[0]] = s;
          best_tuple[l][t[0]] = t;
        }
        std::size_t m = row.size();
        bool carried = true;
        while (carried && m-- > 0) {
          if (++t[m] < row[m]) carried = false;
          else t[m] = 0;
        }
        if (carried) break;
      }
    }
    // Viterbi over first-variable states.
    std::vector<std::vector<double>> value(L);
    std::vector<std::vector<std::uint32_t>> back(L);
    value[0] = best_local[0];
    for (std::size_t l = 1; l < L; ++l) {
      const std::size_t prev_n = shape_[l - 1][0], n = shape_[l][0];
      value[l].assign(n, worst);
      back[l].assign(n, 0);
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t p = 0; p < prev_n; ++p) {
          const double v = value[l - 1][p] + chain_[l - 1][p * n + c] + best_local[l][c];
          if (better(v, value[l][c])) {
            value[l][c] = v;
            back[l][c] = static_cast<std::uint32_t>(p);
          }
        }
    }
    std::uint32_t c = 0;
    for (std::uint32_t i = 1; i < value[L - 1].size(); ++i)
      if (better(value[L - 1][i], value[L - 1][c])) c = i;
    const double total = value[L - 1][c];
    Architecture a;
    a.choices.resize(L);
    for (std::size_t l = L; l-- > 0;) {
      a.choices[l] = best_tuple[l][c];
      if (l > 0) c = back[l][c];
    }
    return {total, a};
  }

  Shape shape_;
  OracleConfig config_;
  std::vector<std::vector<std::vector<double>>> additive_;
  std::vector<std::vector<Pair>> pairs_;
  std::vector<std::vector<double>> chain_;
  std::vector<Synergy> synergy_;
  double min_raw_ = 0.0;
  double max_raw_ = 0.0;
  Architecture argmax_;
};

}  // namespace fpnas
