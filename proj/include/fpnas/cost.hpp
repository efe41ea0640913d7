#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fpnas/space.hpp"

namespace fpnas {

// FLOPS are counted as multiply-accumulates (1 MAC = 1 FLOP).
struct CostModel {
  int se_reduction_ratio = 4;
  // Extra FLOPs per activation element for swish; relu is free.
  std::uint64_t swish_flops_per_element = 1;
};

// A fully resolved layer: every searchable value substituted, channels and
// resolutions propagated.
struct LayerConfig {
  Operator op = Operator::mbconv;
  long position = -1;  // searchable position, -1 for fixed layers
  int in_channels = 0;
  int out_channels = 0;
  int hidden_channels = 0;  // mbconv only
  int kernel = 0;           // 0 = skip (mbconv only)
  int stride = 1;
  int splits = 0;  // 0 none, 1 squeeze-excite, >=2 split-attention
  bool swish = false;
  int in_resolution = 0;
  int out_resolution = 0;

  bool skip() const { return op == Operator::mbconv && kernel == 0; }
};

inline int hidden_channels(double expansion, int in_channels) {
  return std::max(1, static_cast<int>(std::lround(expansion * in_channels)));
}

inline std::vector<LayerConfig> resolve_layers(const SearchSpace& space, const Architecture& arch) {
  std::vector<LayerConfig> layers;
  int channels = space.input_channels();
  int resolution = space.input_resolution();
  std::size_t block = 0;
  for (std::size_t gi = 0; gi < space.groups().size(); ++gi) {
    const auto& g = space.groups()[gi];
    for (int r = 0; r < (g.op == Operator::avgpool ? 1 : g.repeat); ++r) {
      LayerConfig c;
      c.op = g.op;
      c.in_channels = channels;
      c.in_resolution = resolution;
      c.stride = r == 0 ? g.stride : 1;
      switch (g.op) {
        case Operator::avgpool:
          c.out_channels = channels;
          c.stride = 1;
          c.out_resolution = 1;
          break;
        case Operator::fc:
          c.out_channels = static_cast<int>(as_number(g.var(Variable::channel).values.front()));
          c.out_resolution = 1;
          break;
        case Operator::conv:
          c.kernel = static_cast<int>(as_number(g.var(Variable::kernel).values.front()));
          c.out_channels = static_cast<int>(as_number(g.var(Variable::channel).values.front()));
          c.out_resolution = (resolution + c.stride - 1) / c.stride;
          break;
        case Operator::mbconv: {
          auto fixed = [&](Variable v) -> const ChoiceValue& { return g.var(v).values.front(); };
          auto pick = [&](Variable v) -> const ChoiceValue& {
            if (!g.searchable()) return fixed(v);
            return space.value(arch, space.blocks()[block].position, v);
          };
          if (g.searchable()) c.position = static_cast<long>(space.blocks()[block].position);
          c.kernel = static_cast<int>(as_number(pick(Variable::kernel)));
          c.swish = std::get<std::string>(pick(Variable::nonlinearity)) == "swish";
          c.splits = static_cast<int>(as_number(pick(Variable::splits)));
          if (c.kernel == 0) {
            c.out_channels = channels;  // identity bypass keeps the input width
            c.out_resolution = resolution;
            c.splits = 0;
          } else {
            c.out_channels = static_cast<int>(as_number(pick(Variable::channel)));
            c.hidden_channels = hidden_channels(as_number(pick(Variable::expansion)), channels);
            c.out_resolution = (resolution + c.stride - 1) / c.stride;
          }
          if (g.searchable()) ++block;
          break;
        }
      }
      channels = c.out_channels;
      resolution = c.out_resolution;
      layers.push_back(c);
    }
  }
  return layers;
}

// MACs of one resolved layer. MBConv = expand 1x1 + depthwise kxk (one branch
// per split) + attention + project 1x1.
inline std::uint64_t block_flops(const LayerConfig& c, const CostModel& model = {}) {
  using u64 = std::uint64_t;
  const u64 hin = static_cast<u64>(c.in_resolution) * static_cast<u64>(c.in_resolution);
  const u64 hout = static_cast<u64>(c.out_resolution) * static_cast<u64>(c.out_resolution);
  const u64 cin = static_cast<u64>(c.in_channels);
  const u64 cout = static_cast<u64>(c.out_channels);
  const u64 k2 = static_cast<u64>(c.kernel) * static_cast<u64>(c.kernel);
  switch (c.op) {
    case Operator::conv: return hout * cout * k2 * cin;
    case Operator::avgpool: return hin * cin;
    case Operator::fc: return hin * cin * cout;
    case Operator::mbconv: break;
  }
  if (c.skip()) return 0;
  const u64 hidden = static_cast<u64>(c.hidden_channels);
  const u64 branches = c.splits >= 2 ? static_cast<u64>(c.splits) : 1;
  const u64 act = c.swish ? model.swish_flops_per_element : 0;
  const u64 reduced = std::max<u64>(1, hidden / static_cast<u64>(model.se_reduction_ratio));

  u64 f = hin * cin * hidden;            // expand
  f += hin * hidden * act;               // activation after expand
  f += branches * hout * hidden * k2;    // depthwise branches
  f += branches * hout * hidden * act;   // activation after depthwise
  if (c.splits == 1) {
    f += hout * hidden;                      // global pool
    f += hidden * reduced + reduced * hidden;  // squeeze / excite
    f += hout * hidden;                      // channel rescale
  } else if (c.splits >= 2) {
    f += (branches - 1) * hout * hidden;               // branch sum
    f += hout * hidden;                                // global pool
    f += hidden * reduced + reduced * hidden * branches;  // attention head
    f += branches * hout * hidden;                     // weighted combine
  }
  f += hout * hidden * cout;  // project
  return f;
}

inline std::uint64_t block_params(const LayerConfig& c, const CostModel& model = {}) {
  using u64 = std::uint64_t;
  const u64 cin = static_cast<u64>(c.in_channels);
  const u64 cout = static_cast<u64>(c.out_channels);
  const u64 k2 = static_cast<u64>(c.kernel) * static_cast<u64>(c.kernel);
  switch (c.op) {
    case Operator::conv: return k2 * cin * cout;
    case Operator::avgpool: return 0;
    case Operator::fc: return cin * cout + cout;
    case Operator::mbconv: break;
  }
  if (c.skip()) return 0;
  const u64 hidden = static_cast<u64>(c.hidden_channels);
  const u64 branches = c.splits >= 2 ? static_cast<u64>(c.splits) : 1;
  const u64 reduced = std::max<u64>(1, hidden / static_cast<u64>(model.se_reduction_ratio));
  u64 p = cin * hidden + branches * k2 * hidden + hidden * cout;
  if (c.splits == 1) p += hidden * reduced + reduced + reduced * hidden + hidden;
  if (c.splits >= 2) p += hidden * reduced + reduced + reduced * hidden * branches + hidden * branches;
  return p;
}

struct PositionCost {
  std::size_t position = 0;
  std::uint64_t flops = 0;
};

struct CostReport {
  std::uint64_t total_flops = 0;
  std::uint64_t fixed_flops = 0;  // stem, head and any non-searchable layers
  std::vector<PositionCost> per_position;
  std::uint64_t parameter_count = 0;
  std::vector<LayerConfig> layers;
  std::vector<std::uint64_t> layer_flops;
};

inline CostReport arch_flops(const SearchSpace& space, const Architecture& arch, const CostModel& model = {}) {
  if (auto v = validate_architecture(space, arch); !v.empty()) throw ValidationError("invalid architecture: " + v.front());
  CostReport r;
  r.layers = resolve_layers(space, arch);
  r.per_position.resize(space.num_positions());
  for (std::size_t l = 0; l < r.per_position.size(); ++l) r.per_position[l].position = l;
  for (const auto& c : r.layers) {
    const auto f = block_flops(c, model);
    r.layer_flops.push_back(f);
    r.parameter_count += block_params(c, model);
    if (c.position >= 0) r.per_position[static_cast<std::size_t>(c.position)].flops += f;
    else r.fixed_flops += f;
  }
  r.total_flops = r.fixed_flops;
  for (const auto& p : r.per_position) r.total_flops += p.flops;
  return r;
}

inline json cost_report_to_json(const CostReport& r) {
  json j;
  j["total_flops"] = r.total_flops;
  j["fixed_flops"] = r.fixed_flops;
  j["parameter_count"] = r.parameter_count;
  json per = json::array();
  for (const auto& p : r.per_position) per.push_back({{"position", p.position}, {"flops", p.flops}});
  j["per_position"] = per;
  return j;
}

// max(0, flops / target - 1)
inline double hinge_cost(double flops, double target) {
  if (!(target > 0.0)) throw ValidationError("hinge target must be positive");
  return std::max(0.0, flops / target - 1.0);
}

inline double expected_cost(std::span<const double> costs) {
  if (costs.empty()) throw ValidationError("expected_cost needs at least one sample");
  return std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(costs.size());
}

// Lower median of arch_flops over n uniformly drawn architectures.
inline std::uint64_t median_space_flops(const SearchSpace& space, std::size_t n_samples, std::uint64_t seed,
                                        const CostModel& model = {}) {
  if (n_samples == 0) throw ValidationError("median_space_flops needs n_samples >= 1");
  Rng rng(seed);
  std::vector<std::uint64_t> flops;
  flops.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) flops.push_back(arch_flops(space, uniform_architecture(space, rng), model).total_flops);
  auto mid = flops.begin() + static_cast<std::ptrdiff_t>((n_samples - 1) / 2);
  std::nth_element(flops.begin(), mid, flops.end());
  return *mid;
}

}  // namespace fpnas
