#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fpnas/update.hpp"

using namespace fpnas;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed, double scale) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

}  // namespace

TEST(ImportanceWeights, HandCase) {
  const std::vector<double> ll{-1.0, -1.0}, cost{1.0, 0.0};
  const auto w = importance_weights(ll, cost, 0.3);
  EXPECT_NEAR(w.m[0], 0.2, 1e-15);
  EXPECT_NEAR(w.m[1], 0.5, 1e-15);
  EXPECT_NEAR(w.sum(), 0.7, 1e-15);
}

TEST(ImportanceWeights, PartsSumAsExpected) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t k = 1 + seed % 17;
    const auto ll = noise(k, seed, 3.0);
    auto cost = noise(k, seed + 100, 1.0);
    for (auto& c : cost) c = std::abs(c);
    const double beta = 0.1 * double(seed % 7);
    const auto w = importance_weights(ll, cost, beta);
    double lsum = 0, csum = 0;
    for (double v : w.likelihood_part) lsum += v;
    for (double v : w.cost_part) csum += v;
    EXPECT_NEAR(lsum, 1.0, 1e-12);
    EXPECT_NEAR(csum, beta, 1e-12);
    EXPECT_NEAR(w.sum(), 1.0 - beta, 1e-12);
  }
}

TEST(ImportanceWeights, ZeroCostDropsCostTerm) {
  const std::vector<double> ll{0.0, std::log(3.0)}, cost{0.0, 0.0};
  const auto w = importance_weights(ll, cost, 0.9);
  EXPECT_NEAR(w.m[0], 0.25, 1e-15);
  EXPECT_NEAR(w.m[1], 0.75, 1e-15);
}

TEST(ImportanceWeights, ExtremeLogLikelihoodsStayFinite) {
  const std::vector<double> ll{-1e6, 0.0, -5e5}, cost{0, 0, 0};
  const auto w = importance_weights(ll, cost, 0);
  EXPECT_NEAR(w.m[1], 1.0, 1e-15);
  for (double v : w.m) EXPECT_TRUE(std::isfinite(v));
}

TEST(ImportanceWeights, RejectsBadInput) {
  const double nan = std::numeric_limits<double>::quiet_NaN(), inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(importance_weights(std::vector<double>{0.0, nan}, std::vector<double>{0, 0}, 0), RuntimeError);
  EXPECT_THROW(importance_weights(std::vector<double>{0.0, -inf}, std::vector<double>{0, 0}, 0), RuntimeError);
  EXPECT_THROW(importance_weights(std::vector<double>{0.0}, std::vector<double>{inf}, 0), RuntimeError);
  EXPECT_THROW(importance_weights(std::vector<double>{0.0}, std::vector<double>{-1}, 0), RuntimeError);
  EXPECT_THROW(importance_weights(std::vector<double>{}, std::vector<double>{}, 0), ValidationError);
  EXPECT_THROW(importance_weights(std::vector<double>{0.0}, std::vector<double>{0, 0}, 0), ValidationError);
  EXPECT_THROW(importance_weights(std::vector<double>{0.0}, std::vector<double>{0}, -0.1), ValidationError);
}

TEST(AlphaGradient, WeightedSumOfPerSampleGradients) {
  auto d = ArchDistribution::uniform(Shape{{3, 2}, {4}}, DistMode::factorized);
  Rng rng(7);
  for (auto& b : d.blocks())
    for (auto& v : b) v = rng.normal();
  SampleBatch batch;
  batch.architectures = {Architecture{{{0, 1}, {3}}}, Architecture{{{2, 0}, {1}}}, Architecture{{{0, 1}, {3}}}};
  ImportanceWeights w;
  w.m = {0.5, -0.2, 0.1};
  const auto g = alpha_gradient(d, batch, w);
  for (std::size_t b = 0; b < d.num_blocks(); ++b)
    for (std::size_t i = 0; i < d.blocks()[b].size(); ++i) {
      double want = 0;
      for (std::size_t k = 0; k < 3; ++k) want += w.m[k] * grad_neg_log_prob(d, batch.architectures[k]).blocks[b][i];
      EXPECT_NEAR(g.blocks[b][i], want, 1e-15);
    }
  w.m.pop_back();
  EXPECT_THROW(alpha_gradient(d, batch, w), ValidationError);
}

TEST(AlphaGradient, SingleSampleWithFullWeightVanishesInExpectation) {
  // With one sample and m = [1], E[grad] = sum_A P(A) (softmax - onehot(A)) = 0.
  auto d = ArchDistribution::uniform(Shape{{3}}, DistMode::joint);
  d.blocks()[0] = {0.3, -1.0, 0.7};
  const auto p = d.probabilities(0);
  std::vector<double> expect(3, 0.0);
  for (std::uint32_t c = 0; c < 3; ++c) {
    SampleBatch b;
    b.architectures = {Architecture{{{c}}}};
    ImportanceWeights w;
    w.m = {1.0};
    const auto g = alpha_gradient(d, b, w);
    for (std::size_t i = 0; i < 3; ++i) expect[i] += p[c] * g.blocks[0][i];
  }
  for (double v : expect) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(AlphaGradient, ExhaustiveBatchMatchesWeightedObjective) {
  // One position, three choices, batch = every choice once, weights fixed by hand.
  auto d = ArchDistribution::uniform(Shape{{3}}, DistMode::joint);
  d.blocks()[0] = {0.2, -0.4, 1.1};
  SampleBatch batch;
  for (std::uint32_t c = 0; c < 3; ++c) batch.architectures.push_back(Architecture{{{c}}});
  ImportanceWeights w;
  w.m = {0.6, -0.1, 0.25};
  auto objective = [&](const ArchDistribution& x) {
    double f = 0;
    for (std::size_t k = 0; k < 3; ++k) f -= w.m[k] * log_prob(x, batch.architectures[k]);
    return f;
  };
  const auto g = alpha_gradient(d, batch, w);
  const double h = 1e-5;
  for (std::size_t i = 0; i < 3; ++i) {
    auto up = d, dn = d;
    up.blocks()[0][i] += h;
    dn.blocks()[0][i] -= h;
    EXPECT_NEAR(g.blocks[0][i], (objective(up) - objective(dn)) / (2 * h), 1e-9);
  }
}

TEST(Adam, MatchesReferenceImplementation) {
  auto d = ArchDistribution::uniform(Shape{{3}, {2, 2}}, DistMode::factorized);
  auto state = OptimizerState::for_distribution(d);
  EXPECT_EQ(state.config.lr, 0.016);
  EXPECT_EQ(state.config.beta1, 0.9);
  EXPECT_EQ(state.config.beta2, 0.999);
  EXPECT_EQ(state.config.eps, 1e-8);

  // Scalar reference, written out independently.
  const std::size_t n = 7;
  std::vector<double> x(n, 0.0), m(n, 0.0), v(n, 0.0);
  Rng rng(13);
  for (int t = 1; t <= 25; ++t) {
    DistGradient g = DistGradient::zeros_like(d);
    std::vector<double> flat;
    for (auto& b : g.blocks)
      for (auto& e : b) {
        e = rng.normal();
        flat.push_back(e);
      }
    adam_step(state, d, g);
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * flat[i];
      v[i] = 0.999 * v[i] + 0.001 * flat[i] * flat[i];
      const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
      x[i] -= 0.016 * mh / (std::sqrt(vh) + 1e-8);
    }
    std::size_t i = 0;
    for (const auto& b : d.blocks())
      for (double e : b) EXPECT_NEAR(e, x[i++], 1e-14) << "step " << t;
  }
  EXPECT_EQ(state.step, 25u);
}

TEST(Adam, FirstStepMovesEachCoordinateByLr) {
  auto d = ArchDistribution::uniform(Shape{{4}}, DistMode::joint);
  auto state = OptimizerState::for_distribution(d);
  DistGradient g{{{2.0, -0.5, 0.0, 1e-3}}};
  adam_step(state, d, g);
  EXPECT_NEAR(d.blocks()[0][0], -0.016, 1e-9);
  EXPECT_NEAR(d.blocks()[0][1], 0.016, 1e-9);
  EXPECT_EQ(d.blocks()[0][2], 0.0);
  EXPECT_NEAR(d.blocks()[0][3], -0.016, 1e-6);
}

TEST(Adam, IdenticalInputsGiveIdenticalState) {
  auto d1 = ArchDistribution::uniform(Shape{{3}}, DistMode::joint), d2 = d1;
  auto s1 = OptimizerState::for_distribution(d1), s2 = OptimizerState::for_distribution(d2);
  DistGradient g{{{0.1, 0.2, -0.3}}};
  for (int i = 0; i < 4; ++i) {
    adam_step(s1, d1, g);
    adam_step(s2, d2, g);
  }
  EXPECT_EQ(s1, s2);
  EXPECT_EQ(d1, d2);
  DistGradient bad{{{0.1, 0.2}}};
  EXPECT_THROW(adam_step(s1, d1, bad), ValidationError);
}

TEST(Adam, FixedDirectionRaisesFavouredProbabilityMonotonically) {
  auto d = ArchDistribution::uniform(Shape{{4}}, DistMode::joint);
  auto state = OptimizerState::for_distribution(d);
  DistGradient g{{{0.25, 0.25, -0.75, 0.25}}};  // descent favours choice 2
  double prev = d.probabilities(0)[2];
  for (int t = 0; t < 500; ++t) {
    adam_step(state, d, g);
    const double p = d.probabilities(0)[2];
    EXPECT_GT(p, prev) << "step " << t;
    prev = p;
  }
}

TEST(CostAwareLoss, Form) {
  EXPECT_NEAR(cost_aware_loss(-2.0, 0.5, 0.3), 2.0 + 0.3 * std::log(0.5), 1e-15);
  EXPECT_NEAR(cost_aware_loss(-2.0, 0.0, 0.3), 2.0 + 0.3 * std::log(1e-8), 1e-12);
  EXPECT_EQ(cost_aware_loss(-1.0, 0.0, 0.0), 1.0);
}
