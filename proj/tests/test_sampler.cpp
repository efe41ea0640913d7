#include <gtest/gtest.h>

#include "fpnas/presets.hpp"
#include "fpnas/sampler.hpp"

using namespace fpnas;

TEST(SampleCount, AdaptiveExamples) {
  const auto p = SamplingPolicy::adaptive(0.25, 64, 1);
  EXPECT_EQ(sample_count(p, 59.36), 14u);
  EXPECT_EQ(sample_count(p, 3.99), 1u);
  EXPECT_EQ(sample_count(p, 0.0), 1u);
  EXPECT_EQ(sample_count(p, 4.0), 1u);
  EXPECT_EQ(sample_count(p, 8.0), 2u);
  EXPECT_EQ(sample_count(p, 1e6), 64u);
}

TEST(SampleCount, ClampsToBounds) {
  const auto p = SamplingPolicy::adaptive(1.0, 10, 3);
  for (double h = 0; h < 20; h += 0.37) {
    const auto k = sample_count(p, h);
    EXPECT_GE(k, 3u);
    EXPECT_LE(k, 10u);
    EXPECT_EQ(k, static_cast<std::size_t>(std::clamp(std::floor(h), 3.0, 10.0)));
  }
}

TEST(SampleCount, MonotoneInEntropy) {
  const auto p = SamplingPolicy::adaptive(0.25);
  std::size_t prev = 0;
  for (double h = 0; h < 300; h += 0.1) {
    const auto k = sample_count(p, h);
    EXPECT_GE(k, prev);
    prev = k;
  }
}

TEST(SampleCount, FixedIgnoresEntropy) {
  const auto p = SamplingPolicy::fixed(13);
  for (double h : {0.0, 5.0, 59.36, 1e9}) EXPECT_EQ(sample_count(p, h), 13u);
}

TEST(SamplingPolicy, Validation) {
  EXPECT_THROW(SamplingPolicy::fixed(0).validate(), ValidationError);
  EXPECT_THROW(SamplingPolicy::adaptive(0.0).validate(), ValidationError);
  EXPECT_THROW(SamplingPolicy::adaptive(0.25, 4, 5).validate(), ValidationError);
  EXPECT_THROW(SamplingPolicy::adaptive(0.25, 4, 0).validate(), ValidationError);
  EXPECT_NO_THROW(SamplingPolicy::adaptive(0.25, 64, 2).validate());
}

TEST(DrawBatch, SizeFollowsPolicyAndCountsCumulatively) {
  const auto s = load_space("fbnetv2-f");
  const auto d = ArchDistribution::uniform(s, DistMode::factorized);
  const double h = entropy(d);
  Rng rng(1);
  std::uint64_t total = 0;
  const auto policy = SamplingPolicy::adaptive(0.25);
  const auto b1 = draw_batch(d, policy, rng, &total);
  EXPECT_EQ(b1.size(), sample_count(policy, h));
  EXPECT_EQ(b1.log_probs.size(), b1.size());
  EXPECT_EQ(total, b1.size());
  const auto b2 = draw_batch(d, SamplingPolicy::fixed(5), rng, &total);
  EXPECT_EQ(b2.size(), 5u);
  EXPECT_EQ(total, b1.size() + 5);
  for (std::size_t i = 0; i < b1.size(); ++i) {
    EXPECT_TRUE(validate_architecture(s, b1.architectures[i]).empty());
    EXPECT_NEAR(b1.log_probs[i], -h, 1e-9);  // uniform: every architecture has log P = -H
  }
}

TEST(DrawBatch, KeepsDuplicates) {
  auto d = ArchDistribution::uniform(Shape{{2}}, DistMode::joint);
  d.blocks()[0] = {50.0, 0.0};
  Rng rng(2);
  const auto b = draw_batch(d, SamplingPolicy::fixed(8), rng);
  ASSERT_EQ(b.size(), 8u);
  for (const auto& a : b.architectures) EXPECT_EQ(a, (Architecture{{{0}}}));
}
