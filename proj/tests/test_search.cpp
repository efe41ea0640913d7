#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fpnas/presets.hpp"
#include "fpnas/search.hpp"

using namespace fpnas;

namespace {

SearchSpace toy() { return load_space(std::string(FPNAS_SOURCE_DIR) + "/configs/spaces/toy-3x4.json"); }
SearchSpace dense() { return load_space(std::string(FPNAS_SOURCE_DIR) + "/configs/spaces/dense-toy.json"); }

SearchConfig small_config(Schedule schedule) {
  SearchConfig c;
  c.epochs = 40;
  c.warmup_epochs = 4;
  c.steps_per_epoch = 8;
  c.schedule = schedule;
  c.sampling = SamplingPolicy::adaptive(0.25, 64, 2);
  c.beta = 0.0;
  c.seed = 3;
  return c;
}

OracleConfig oracle_config(std::uint64_t seed) {
  OracleConfig o;
  o.seed = seed;
  o.tau = 0.1;
  o.chain_scale = 0.1;
  return o;
}

class ThrowingEvaluator : public Evaluator {
 public:
  explicit ThrowingEvaluator(std::uint64_t fail_at) : fail_at_(fail_at) {}
  std::string kind() const override { return "throwing"; }
  std::vector<double> validate(std::span<const Architecture> archs, std::uint64_t step) const override {
    std::vector<double> v(archs.size(), 0.0);
    if (step == fail_at_) v[0] = std::numeric_limits<double>::quiet_NaN();
    return v;
  }
  double score(const Architecture&) const override { return 0.0; }

 private:
  std::uint64_t fail_at_;
};

}  // namespace

TEST(SearchConfig, Validation) {
  auto c = small_config(Schedule::mixed);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.theta_epoch(), 10u);
  c.theta = 4;  // must come after warm-up
  EXPECT_THROW(c.validate(), ValidationError);
  c.theta = 41;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small_config(Schedule::joint_only);
  c.warmup_epochs = 41;
  EXPECT_THROW(c.validate(), ValidationError);
  c.warmup_epochs = 40;
  EXPECT_NO_THROW(c.validate());
  c.target_flops = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c.target_flops.reset();
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Search, DeterministicForFixedSeed) {
  const auto s = toy();
  for (auto schedule : {Schedule::joint_only, Schedule::factorized_only, Schedule::mixed}) {
    TabularOracle o1(s, oracle_config(1)), o2(s, oracle_config(1));
    const auto a = run_search(small_config(schedule), s, o1);
    const auto b = run_search(small_config(schedule), s, o2);
    EXPECT_EQ(a.architecture, b.architecture);
    EXPECT_EQ(a.distribution, b.distribution);
    EXPECT_EQ(a.optimizer, b.optimizer);
    ASSERT_EQ(a.trace.steps.size(), b.trace.steps.size());
    for (std::size_t i = 0; i < a.trace.steps.size(); ++i) {
      EXPECT_EQ(a.trace.steps[i].k, b.trace.steps[i].k);
      EXPECT_EQ(a.trace.steps[i].mpa_hash, b.trace.steps[i].mpa_hash);
    }
  }
}

TEST(Search, WarmupOnlyRunReturnsTieBreakArchitecture) {
  const auto s = toy();
  auto c = small_config(Schedule::joint_only);
  c.warmup_epochs = c.epochs;
  TabularOracle o(s, oracle_config(2));
  const auto r = run_search(c, s, o);
  EXPECT_EQ(r.distribution, ArchDistribution::uniform(s, DistMode::joint));
  EXPECT_EQ(r.architecture, (Architecture{{{0}, {0}, {0}}}));
  EXPECT_EQ(r.optimizer.step, 0u);
}

TEST(Search, EntropyConstantDuringWarmupThenFalls) {
  const auto s = toy();
  for (auto schedule : {Schedule::joint_only, Schedule::factorized_only, Schedule::mixed}) {
    TabularOracle o(s, oracle_config(4));
    const auto r = run_search(small_config(schedule), s, o);
    const double h0 = r.trace.steps.front().entropy_nats;
    EXPECT_NEAR(h0, std::log(64.0), 1e-12);
    for (const auto& rec : r.trace.steps)
      if (rec.warmup) {
        EXPECT_EQ(rec.entropy_nats, h0);
        EXPECT_TRUE(std::isnan(rec.sum_m));
      }
    EXPECT_LT(entropy(r.distribution), h0);
  }
}

TEST(Search, CumulativeSamplesStrictlyIncrease) {
  const auto s = toy();
  TabularOracle o(s, oracle_config(5));
  const auto r = run_search(small_config(Schedule::mixed), s, o);
  std::uint64_t prev = 0, sum = 0;
  for (const auto& rec : r.trace.steps) {
    EXPECT_GT(rec.cumulative_samples, prev);
    sum += rec.k;
    EXPECT_EQ(rec.cumulative_samples, sum);
    prev = rec.cumulative_samples;
  }
  EXPECT_EQ(r.trace.cumulative_samples(), sum);
}

TEST(Search, AdaptiveKNeverExceedsFirstPostWarmupK) {
  const auto s = load_space("fbnetv2-f");
  auto c = small_config(Schedule::joint_only);
  c.schedule = Schedule::factorized_only;
  c.epochs = 60;
  c.warmup_epochs = 5;
  OracleConfig oc = oracle_config(6);
  oc.tau = 0.01;
  TabularOracle o(s, oc);
  const auto r = run_search(c, s, o);
  std::size_t first = 0;
  for (const auto& rec : r.trace.steps)
    if (!rec.warmup) {
      first = rec.k;
      break;
    }
  ASSERT_GT(first, 0u);
  EXPECT_LE(r.trace.steps.back().k, first);
  EXPECT_LT(r.trace.steps.back().k, first);
}

TEST(Search, SelectionIsMostProbableArchitecture) {
  const auto s = toy();
  for (auto schedule : {Schedule::joint_only, Schedule::factorized_only, Schedule::mixed}) {
    TabularOracle o(s, oracle_config(7));
    const auto r = run_search(small_config(schedule), s, o);
    EXPECT_EQ(r.architecture, most_probable_architecture(r.distribution));
    EXPECT_EQ(r.trace.steps.back().mpa_hash, arch_hash(r.architecture));
    EXPECT_EQ(r.score, o.score(r.architecture));
    EXPECT_EQ(r.cost.total_flops, arch_flops(s, r.architecture).total_flops);
  }
}

TEST(Search, MixedConversionIsTransparent) {
  const auto s = dense();
  TabularOracle o(s, oracle_config(8));
  Search search(small_config(Schedule::mixed), s, o);
  while (search.current_epoch() < search.config().theta_epoch()) search.step();
  const auto before = search.distribution();
  ASSERT_EQ(before.mode(), DistMode::factorized);
  ASSERT_TRUE(search.maybe_convert());
  const auto& after = search.distribution();
  EXPECT_EQ(after.mode(), DistMode::joint);
  EXPECT_NEAR(entropy(after), entropy(before), 1e-9);
  Rng rng(1);
  for (int i = 0; i < 300; ++i) {
    const auto a = uniform_architecture(s, rng);
    EXPECT_NEAR(log_prob(after, a), log_prob(before, a), 1e-9);
  }
  EXPECT_EQ(most_probable_architecture(after), most_probable_architecture(before));
  EXPECT_EQ(search.optimizer().step, 0u);
  EXPECT_FALSE(search.maybe_convert());
  ASSERT_EQ(search.trace().events.size(), 1u);
  EXPECT_NE(search.trace().events[0].what.find("optimizer state restarted"), std::string::npos);
}

TEST(Search, MixedScheduleSwitchesModeAtTheta) {
  const auto s = toy();
  TabularOracle o(s, oracle_config(9));
  const auto r = run_search(small_config(Schedule::mixed), s, o);
  for (const auto& rec : r.trace.steps)
    EXPECT_EQ(rec.mode, rec.epoch < 10 ? DistMode::factorized : DistMode::joint) << rec.step;
}

TEST(Search, ResumeIsBitExact) {
  const auto s = toy();
  auto c = small_config(Schedule::mixed);
  TabularOracle o(s, oracle_config(10));
  const auto full = run_search(c, s, o);
  for (std::uint64_t stop : {1u, 40u, 80u, 81u, 200u}) {
    Search first(c, s, o);
    while (first.current_step() < stop) first.step();
    const auto st = first.state();
    Search second(c, s, o);
    second.restore(st);
    const auto r = second.run();
    EXPECT_EQ(r.distribution, full.distribution) << stop;
    EXPECT_EQ(r.optimizer, full.optimizer) << stop;
    EXPECT_EQ(r.trace.steps.size(), full.trace.steps.size());
    EXPECT_EQ(r.trace.steps.back().mpa_hash, full.trace.steps.back().mpa_hash);
  }
  Search wrong(c, s, o);
  auto st = wrong.state();
  st.distribution = ArchDistribution::uniform(Shape{{2}}, DistMode::joint);
  EXPECT_THROW(wrong.restore(st), ValidationError);
}

TEST(Search, EvaluatorFailureIsWrappedWithStep) {
  const auto s = toy();
  ThrowingEvaluator ev(50);
  Search search(small_config(Schedule::joint_only), s, ev);
  try {
    search.run();
    FAIL() << "expected a runtime error";
  } catch (const RuntimeError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("step 50"), std::string::npos) << what;
    EXPECT_NE(what.find("non-finite"), std::string::npos) << what;
  }
  EXPECT_EQ(search.current_step(), 50u);
}

TEST(Search, JointCapIsEnforcedUpFront) {
  const auto s = load_space(std::string(FPNAS_SOURCE_DIR) + "/configs/spaces/single-position.json");
  auto c = small_config(Schedule::joint_only);
  c.joint_cap = 100;
  TabularOracle o(s, oracle_config(1));
  EXPECT_THROW(Search(c, s, o), RuntimeError);
  c.schedule = Schedule::factorized_only;
  EXPECT_NO_THROW(Search(c, s, o));
}

TEST(Search, CostTermPushesTowardsCheaperArchitectures) {
  const auto s = toy();
  auto c = small_config(Schedule::joint_only);
  c.epochs = 120;
  OracleConfig oc = oracle_config(11);
  oc.tau = 1.0;
  TabularOracle o1(s, oc), o2(s, oc);
  const auto free = run_search(c, s, o1);
  c.beta = 0.9;
  c.target_flops = 0.5 * static_cast<double>(arch_flops(s, free.architecture).total_flops);
  const auto costly = run_search(c, s, o2);
  EXPECT_LT(costly.cost.total_flops, free.cost.total_flops);
  bool any_cost = false;
  for (const auto& rec : costly.trace.steps) any_cost |= rec.expected_cost > 0;
  EXPECT_TRUE(any_cost);
}

TEST(CompareSchedules, ShapeAndSummaries) {
  const auto s = toy();
  std::vector<NamedConfig> configs{{"joint", small_config(Schedule::joint_only)},
                                   {"fixed", small_config(Schedule::joint_only)}};
  configs[1].config.sampling = SamplingPolicy::fixed(3);
  const EvaluatorFactory factory = [&](std::uint64_t seed) { return std::make_unique<TabularOracle>(s, oracle_config(seed)); };
  const auto rows = compare_schedules(configs, s, factory, {1, 2, 3});
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.samples.size(), 3u);
    EXPECT_EQ(r.score.size(), 3u);
    EXPECT_EQ(r.final_entropy.size(), 3u);
  }
  EXPECT_EQ(rows[1].samples_summary().mean, 3.0 * 40 * 8);
  EXPECT_EQ(rows[1].samples_summary().sd, 0.0);
  const auto one = compare_schedules({configs[0]}, s, factory, {1});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].samples[0], rows[0].samples[0]);
  EXPECT_EQ(one[0].score_summary().sd, 0.0);
}

TEST(Summarize, SampleStandardDeviation) {
  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.sd, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(summarize({}).mean, 0.0);
}
