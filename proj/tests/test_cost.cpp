#include <gtest/gtest.h>

#include <algorithm>
#include <iostream>

#include "counting_oracle.hpp"
#include "fpnas/cost.hpp"
#include "fpnas/dist.hpp"
#include "fpnas/presets.hpp"

using namespace fpnas;

namespace {

Architecture zeros(const SearchSpace& s) {
  Architecture a;
  for (const auto& p : s.positions()) a.choices.emplace_back(p.variables.size(), 0u);
  return a;
}

Architecture max_choice(const SearchSpace& s) {
  Architecture a;
  for (const auto& p : s.positions()) {
    auto& t = a.choices.emplace_back();
    for (const auto& cs : p.variables) t.push_back(static_cast<std::uint32_t>(cs.size() - 1));
  }
  return a;
}

LayerConfig mb(int cin, int cout, int hidden, int k, int splits, int res, bool swish = false) {
  LayerConfig c;
  c.op = Operator::mbconv;
  c.in_channels = cin;
  c.out_channels = cout;
  c.hidden_channels = hidden;
  c.kernel = k;
  c.splits = splits;
  c.swish = swish;
  c.in_resolution = c.out_resolution = res;
  return c;
}

}  // namespace

TEST(BlockFlops, StemConv) {
  LayerConfig c;
  c.op = Operator::conv;
  c.in_channels = 3;
  c.out_channels = 16;
  c.kernel = 3;
  c.stride = 2;
  c.in_resolution = 224;
  c.out_resolution = 112;
  EXPECT_EQ(block_flops(c), 5'419'008u);
  EXPECT_EQ(block_flops(c), 112u * 112 * 16 * (3 * 3 * 3));
}

TEST(BlockFlops, SkipIsFree) {
  EXPECT_EQ(block_flops(mb(16, 16, 0, 0, 0, 28)), 0u);
  EXPECT_EQ(block_params(mb(16, 16, 0, 0, 0, 28)), 0u);
}

TEST(BlockFlops, SplitAttentionCostsMoreThanSqueezeExcite) {
  for (int res : {7, 14, 56})
    for (int hidden : {4, 48, 120}) {
      const auto se = block_flops(mb(16, 24, hidden, 3, 1, res));
      const auto sa2 = block_flops(mb(16, 24, hidden, 3, 2, res));
      const auto sa4 = block_flops(mb(16, 24, hidden, 3, 4, res));
      const auto none = block_flops(mb(16, 24, hidden, 3, 0, res));
      EXPECT_LT(none, se);
      EXPECT_LT(se, sa2);
      EXPECT_LT(sa2, sa4);
    }
}

TEST(BlockFlops, SwishAddsOneFlopPerActivation) {
  const auto relu = block_flops(mb(16, 24, 48, 3, 0, 14, false));
  const auto swish = block_flops(mb(16, 24, 48, 3, 0, 14, true));
  EXPECT_EQ(swish - relu, 14u * 14 * 48 * 2);
}

TEST(BlockFlops, HandComputedMbconv) {
  // 8x8 input, 16 -> 24 channels, hidden 32, k=3, SE.
  const std::uint64_t expand = 64 * 16 * 32, dw = 64 * 32 * 9, se = 64 * 32 + 32 * 8 * 2 + 64 * 32, proj = 64 * 32 * 24;
  EXPECT_EQ(block_flops(mb(16, 24, 32, 3, 1, 8)), expand + dw + se + proj);
}

TEST(HiddenChannels, RoundsAndFloorsAtOne) {
  EXPECT_EQ(hidden_channels(0.75, 16), 12);
  EXPECT_EQ(hidden_channels(4.5, 24), 108);
  EXPECT_EQ(hidden_channels(0.01, 8), 1);
}

TEST(ArchFlops, AllSkipToyGivesStemOnly) {
  const auto s = parse_space(R"({"name":"t","input_resolution":32,"input_channels":3,"groups":[
    {"operator":"conv","kernel":3,"channel":16,"stride":2},
    {"operator":"mbconv","kernel":[0,3],"nonlinearity":"relu","splits":0,"expansion":2,"channel":16},
    {"operator":"mbconv","kernel":[0,3],"nonlinearity":"relu","splits":0,"expansion":2,"channel":16}]})");
  const auto r = arch_flops(s, zeros(s));
  EXPECT_EQ(r.total_flops, 16u * 16 * 16 * 27);
  EXPECT_EQ(r.fixed_flops, r.total_flops);
}

TEST(ArchFlops, TotalEqualsBreakdown) {
  Rng rng(5);
  for (const char* name : {"fbnetv2-f", "fbnetv2-f-fine", "fbnetv2-f++"}) {
    const auto s = load_space(name);
    for (int i = 0; i < 50; ++i) {
      const auto r = arch_flops(s, uniform_architecture(s, rng));
      std::uint64_t sum = r.fixed_flops;
      for (const auto& p : r.per_position) sum += p.flops;
      EXPECT_EQ(r.total_flops, sum);
      std::uint64_t layer_sum = 0;
      for (auto f : r.layer_flops) layer_sum += f;
      EXPECT_EQ(r.total_flops, layer_sum);
    }
  }
}

TEST(ArchFlops, MatchesCountingOracle) {
  Rng rng(17);
  for (const char* name : {"fbnetv2-f", "fbnetv2-f-fine", "fbnetv2-f++"}) {
    const auto s = load_space(name);
    for (int i = 0; i < 100; ++i) {
      const auto a = uniform_architecture(s, rng);
      EXPECT_EQ(arch_flops(s, a).total_flops, oracle::count_macs(s, a)) << name << " " << serialize(a);
    }
  }
}

TEST(ArchFlops, MaxChoiceAt128MatchesOracle) {
  const auto s = load_space("fbnetv2-f").with_resolution(128);
  const auto a = max_choice(s);
  const double got = static_cast<double>(arch_flops(s, a).total_flops);
  const double want = static_cast<double>(oracle::count_macs(s, a));
  EXPECT_NEAR(got / want, 1.0, 1e-3);
  EXPECT_LT(got, static_cast<double>(arch_flops(load_space("fbnetv2-f"), a).total_flops));
}

TEST(ArchFlops, InvalidArchitectureThrows) {
  const auto s = load_space("fbnetv2-f");
  auto a = zeros(s);
  a.choices[0][0] = 99;
  EXPECT_THROW(arch_flops(s, a), ValidationError);
}

TEST(ArchFlops, Monotonicity) {
  const auto s = load_space("fbnetv2-f++");
  Rng rng(23);
  int checked = 0;
  while (checked < 1000) {
    auto a = uniform_architecture(s, rng);
    const auto l = rng.below(s.num_positions());
    const auto& p = s.position(l);
    const auto m = rng.below(p.variables.size());
    const auto& cs = p.variables[m];
    if (cs.variable == Variable::nonlinearity) continue;
    const auto cur = a.choices[l][m];
    const double cur_v = as_number(cs[cur]);
    std::vector<std::uint32_t> larger;
    for (std::uint32_t c = 0; c < cs.size(); ++c) {
      const double v = as_number(cs[c]);
      if (cs.variable == Variable::kernel ? (cur_v == 3 && v == 5) : v > cur_v) larger.push_back(c);
    }
    if (larger.empty()) continue;
    const auto before = arch_flops(s, a).total_flops;
    a.choices[l][m] = larger[rng.below(larger.size())];
    EXPECT_GE(arch_flops(s, a).total_flops, before);
    ++checked;
  }
}

TEST(HingeCost, Formula) {
  EXPECT_NEAR(hinge_cost(66e6, 60e6), 0.1, 1e-12);
  EXPECT_EQ(hinge_cost(50e6, 60e6), 0.0);
  EXPECT_EQ(hinge_cost(60e6, 60e6), 0.0);
  EXPECT_THROW(hinge_cost(1, 0), ValidationError);
  EXPECT_THROW(hinge_cost(1, -5), ValidationError);
}

TEST(HingeCost, ConvexAndZeroUnderBudget) {
  const double t = 100;
  for (double x = 0; x <= 300; x += 7) {
    if (x <= t) EXPECT_EQ(hinge_cost(x, t), 0.0);
    const double y = x + 13;
    const double mid = hinge_cost((x + y) / 2, t);
    EXPECT_LE(mid, (hinge_cost(x, t) + hinge_cost(y, t)) / 2 + 1e-12);
  }
}

TEST(ExpectedCost, Mean) {
  EXPECT_NEAR(expected_cost(std::vector<double>{0.1, 0.3}), 0.2, 1e-15);
  EXPECT_EQ(expected_cost(std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_THROW(expected_cost(std::vector<double>{}), ValidationError);
}

TEST(ExpectedCost, MonteCarloMatchesEnumeration) {
  // Enumerable subspace: dense-toy has 13,824 architectures.
  const auto s = load_space(std::string(FPNAS_SOURCE_DIR) + "/configs/spaces/dense-toy.json");
  double total = 0, total_sq = 0;
  std::size_t n = 0;
  std::vector<double> all;
  const double target = 2000;
  for_each_architecture(s, [&](const Architecture& a) {
    const double c = hinge_cost(double(arch_flops(s, a).total_flops), target);
    total += c;
    total_sq += c * c;
    ++n;
  });
  const double mean = total / double(n);
  const double sd = std::sqrt(total_sq / double(n) - mean * mean);
  Rng rng(9);
  std::vector<double> costs;
  for (int i = 0; i < 1000; ++i) costs.push_back(hinge_cost(double(arch_flops(s, uniform_architecture(s, rng)).total_flops), target));
  EXPECT_NEAR(expected_cost(costs), mean, 4 * sd / std::sqrt(1000.0));
}

TEST(MedianFlops, SingleArchitectureSpace) {
  const auto s = parse_space(R"({"name":"t","input_resolution":8,"input_channels":4,"groups":[
    {"operator":"mbconv","kernel":[3],"nonlinearity":"relu","splits":0,"expansion":1,"channel":4}]})");
  Architecture a{{{0}}};
  EXPECT_EQ(median_space_flops(s, 9, 1), arch_flops(s, a).total_flops);
  EXPECT_THROW(median_space_flops(s, 0, 1), ValidationError);
}

TEST(MedianFlops, WithinOneNeighbourOfEnumerationMedian) {
  const auto s = load_space(std::string(FPNAS_SOURCE_DIR) + "/configs/spaces/toy-3x4.json");
  std::vector<std::uint64_t> all;
  for_each_architecture(s, [&](const Architecture& a) { all.push_back(arch_flops(s, a).total_flops); });
  std::sort(all.begin(), all.end());
  const auto med = median_space_flops(s, 4001, 3);
  const auto it = std::lower_bound(all.begin(), all.end(), med);
  ASSERT_NE(it, all.end());
  ASSERT_EQ(*it, med);
  const auto idx = static_cast<std::size_t>(it - all.begin());
  const std::size_t mid = (all.size() - 1) / 2;
  // All copies of the sampled value count; the enumeration median must sit next to one of them.
  const auto last = static_cast<std::size_t>(std::upper_bound(all.begin(), all.end(), med) - all.begin()) - 1;
  EXPECT_TRUE(mid + 1 >= idx && mid <= last + 1) << "idx " << idx << ".." << last << " mid " << mid;
  EXPECT_EQ(median_space_flops(s, 4001, 3), med);
}

TEST(MedianFlops, FbnetV2FIsDeterministic) {
  const auto s = load_space("fbnetv2-f");
  const auto a = median_space_flops(s, 10000, 42);
  EXPECT_EQ(a, median_space_flops(s, 10000, 42));
  EXPECT_GT(a, 0u);
  ::testing::Test::RecordProperty("fbnetv2_f_median_flops", std::to_string(a));
  std::cout << "FBNetV2-F median FLOPS (n=10000, seed 42): " << a << "\n";
}

TEST(ExpectedCost, FbnetV2FSubspaceMonteCarloMatchesEnumeration) {
  // Subspace: positions 8 and 9 free, everything else pinned to one random architecture.
  const auto s = load_space("fbnetv2-f");
  Rng rng(77);
  const auto base = uniform_architecture(s, rng);
  const std::size_t l1 = 8, l2 = 9;
  const auto n1 = s.position(l1).joint_cardinality(), n2 = s.position(l2).joint_cardinality();
  ASSERT_GE(n1 * n2, 10000u);
  ASSERT_LE(n1 * n2, 1000000u);
  const ArchDistribution shape = ArchDistribution::uniform(s, DistMode::joint);
  auto with = [&](std::size_t i, std::size_t j) {
    auto a = base;
    a.choices[l1] = shape.tuple_of(l1, i);
    a.choices[l2] = shape.tuple_of(l2, j);
    return a;
  };
  const double target = static_cast<double>(arch_flops(s, base).total_flops);
  double sum = 0, sum_sq = 0;
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) {
      const double c = hinge_cost(double(arch_flops(s, with(i, j)).total_flops), target);
      sum += c;
      sum_sq += c * c;
    }
  const double n = double(n1 * n2), mean = sum / n, sd = std::sqrt(sum_sq / n - mean * mean);
  std::vector<double> costs;
  for (int k = 0; k < 1000; ++k)
    costs.push_back(hinge_cost(double(arch_flops(s, with(rng.below(n1), rng.below(n2))).total_flops), target));
  EXPECT_NEAR(expected_cost(costs), mean, 4 * sd / std::sqrt(1000.0));
}
