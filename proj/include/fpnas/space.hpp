#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

#include "fpnas/error.hpp"
#include "fpnas/random.hpp"

namespace fpnas {

using json = nlohmann::json;

// A single categorical outcome: numeric (kernel, expansion, channel, splits)
// or symbolic (nonlinearity).
using ChoiceValue = std::variant<double, std::string>;

inline std::string to_string(const ChoiceValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  const double d = std::get<double>(v);
  if (d == std::floor(d) && std::abs(d) < 1e15) return std::to_string(static_cast<long long>(d));
  json j = d;
  return j.dump();
}

inline double as_number(const ChoiceValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw ValidationError("expected a numeric choice, got '" + std::get<std::string>(v) + "'");
}

inline json to_json(const ChoiceValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  const double d = std::get<double>(v);
  if (d == std::floor(d) && std::abs(d) < 1e15) return static_cast<long long>(d);
  return d;
}

// Searchable MBConv variables in their fixed linearization order. Joint blocks
// are laid out row-major over the searchable subset of this order.
enum class Variable : std::uint8_t { kernel, nonlinearity, splits, expansion, channel };
inline constexpr std::array<Variable, 5> kAllVariables{Variable::kernel, Variable::nonlinearity, Variable::splits,
                                                       Variable::expansion, Variable::channel};

inline std::string_view variable_name(Variable v) {
  switch (v) {
    case Variable::kernel: return "kernel";
    case Variable::nonlinearity: return "nonlinearity";
    case Variable::splits: return "splits";
    case Variable::expansion: return "expansion";
    case Variable::channel: return "channel";
  }
  return "?";
}

struct ChoiceSet {
  Variable variable = Variable::kernel;
  std::vector<ChoiceValue> values;

  std::size_t size() const { return values.size(); }
  const ChoiceValue& operator[](std::size_t i) const { return values[i]; }
  std::optional<std::size_t> index_of(const ChoiceValue& v) const {
    auto it = std::find(values.begin(), values.end(), v);
    if (it == values.end()) return std::nullopt;
    return static_cast<std::size_t>(it - values.begin());
  }
  friend bool operator==(const ChoiceSet&, const ChoiceSet&) = default;
};

// Inclusive arithmetic range [min, min+step, ..., max].
inline std::vector<double> expand_range(double min, double max, double step) {
  if (!(step > 0.0)) throw ValidationError("range step must be positive");
  if (min > max) throw ValidationError("range min exceeds max");
  const double span = (max - min) / step;
  const double count = std::round(span);
  if (std::abs(span - count) > 1e-9) {
    throw ValidationError("range (" + to_string(min) + ", " + to_string(max) + ", " + to_string(step) +
                          ") is not divisible by its step");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count) + 1);
  for (std::size_t i = 0; i <= static_cast<std::size_t>(count); ++i) out.push_back(min + static_cast<double>(i) * step);
  out.back() = max;
  return out;
}

inline ChoiceSet expand_range(Variable var, double min, double max, double step) {
  ChoiceSet cs{var, {}};
  for (double v : expand_range(min, max, step)) cs.values.emplace_back(v);
  return cs;
}

enum class Operator : std::uint8_t { conv, mbconv, avgpool, fc };
enum class Sharing : std::uint8_t { per_group, per_block };

inline std::string_view operator_name(Operator op) {
  switch (op) {
    case Operator::conv: return "conv";
    case Operator::mbconv: return "mbconv";
    case Operator::avgpool: return "avgpool";
    case Operator::fc: return "fc";
  }
  return "?";
}

// One MBConv variable as declared: a single fixed value, or a searchable domain.
struct VariableSpec {
  std::vector<ChoiceValue> values;
  bool searchable = false;
  friend bool operator==(const VariableSpec&, const VariableSpec&) = default;
};

struct BlockGroup {
  Operator op = Operator::mbconv;
  int repeat = 1;
  int stride = 1;
  Sharing sharing = Sharing::per_group;
  // mbconv uses all five; conv uses kernel/channel; fc uses channel; avgpool none.
  std::array<VariableSpec, 5> vars{};
  std::optional<int> declared_in_channels;
  std::optional<int> declared_in_resolution;

  const VariableSpec& var(Variable v) const { return vars[static_cast<std::size_t>(v)]; }
  VariableSpec& var(Variable v) { return vars[static_cast<std::size_t>(v)]; }
  bool searchable() const {
    return op == Operator::mbconv && std::any_of(vars.begin(), vars.end(), [](const auto& s) { return s.searchable; });
  }
  friend bool operator==(const BlockGroup&, const BlockGroup&) = default;
};

// A searchable layer position l with its M_l choice sets.
struct Position {
  std::size_t group = 0;
  std::size_t first_block = 0;  // index into SearchSpace::blocks()
  std::size_t block_count = 1;
  int stride = 1;               // stride of the first block covered
  bool skip_legal = false;      // identity bypass is well-defined here
  std::vector<ChoiceSet> variables;

  std::size_t joint_cardinality() const {
    std::size_t n = 1;
    for (const auto& cs : variables) n *= cs.size();
    return n;
  }
  std::optional<std::size_t> slot_of(Variable v) const {
    for (std::size_t m = 0; m < variables.size(); ++m)
      if (variables[m].variable == v) return m;
    return std::nullopt;
  }
};

// A concrete searchable MBConv block (one per repeat of a searchable group).
struct BlockSlot {
  std::size_t group = 0;
  int repeat_index = 0;
  std::size_t position = 0;
  int stride = 1;
};

// One concrete assignment: per position, one choice index per variable.
struct Architecture {
  std::vector<std::vector<std::uint32_t>> choices;

  friend bool operator==(const Architecture&, const Architecture&) = default;
  friend auto operator<=>(const Architecture&, const Architecture&) = default;
};

inline std::string serialize(const Architecture& a) {
  std::string s;
  for (std::size_t l = 0; l < a.choices.size(); ++l) {
    if (l) s += '|';
    for (std::size_t m = 0; m < a.choices[l].size(); ++m) {
      if (m) s += ',';
      s += std::to_string(a.choices[l][m]);
    }
  }
  return s;
}

// FNV-1a over the serialized form; used for trace columns and manifests.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

inline std::string arch_hash(const Architecture& a) { return hex64(fnv1a(serialize(a))); }

using Shape = std::vector<std::vector<std::size_t>>;

class SearchSpace {
 public:
  struct Options {
    // Drop kernel=0 where an identity bypass is undefined (stride 2 or
    // disjoint in/out channel domains).
    bool prune_illegal_skip = true;
  };

  SearchSpace(std::string name, int input_resolution, int input_channels, std::vector<BlockGroup> groups)
      : SearchSpace(std::move(name), input_resolution, input_channels, std::move(groups), Options{}) {}

  SearchSpace(std::string name, int input_resolution, int input_channels, std::vector<BlockGroup> groups,
              Options options)
      : name_(std::move(name)),
        input_resolution_(input_resolution),
        input_channels_(input_channels),
        groups_(std::move(groups)),
        options_(options) {
    build();
  }

  const std::string& name() const { return name_; }
  int input_resolution() const { return input_resolution_; }
  int input_channels() const { return input_channels_; }
  const std::vector<BlockGroup>& groups() const { return groups_; }
  const std::vector<Position>& positions() const { return positions_; }
  const Position& position(std::size_t l) const { return positions_.at(l); }
  std::size_t num_positions() const { return positions_.size(); }
  const std::vector<BlockSlot>& blocks() const { return blocks_; }
  std::size_t num_searchable_groups() const {
    return static_cast<std::size_t>(std::count_if(groups_.begin(), groups_.end(), [](const auto& g) { return g.searchable(); }));
  }
  const Options& options() const { return options_; }

  // Per position, the cardinality of each variable.
  Shape shape() const {
    Shape s;
    s.reserve(positions_.size());
    for (const auto& p : positions_) {
      auto& row = s.emplace_back();
      for (const auto& cs : p.variables) row.push_back(cs.size());
    }
    return s;
  }

  // Same grammar at a different input resolution.
  SearchSpace with_resolution(int resolution) const {
    auto groups = groups_;
    for (auto& g : groups) g.declared_in_resolution.reset();
    return SearchSpace(name_, resolution, input_channels_, std::move(groups), options_);
  }

  // The value a block actually uses for `v`: the chosen value if searchable,
  // otherwise the group's fixed value.
  const ChoiceValue& value(const Architecture& a, std::size_t l, Variable v) const {
    const auto& p = positions_.at(l);
    if (auto slot = p.slot_of(v)) return p.variables[*slot][a.choices.at(l).at(*slot)];
    return groups_[p.group].var(v).values.front();
  }

 private:
  void build();

  std::string name_;
  int input_resolution_;
  int input_channels_;
  std::vector<BlockGroup> groups_;
  Options options_;
  std::vector<Position> positions_;
  std::vector<BlockSlot> blocks_;
};


namespace detail {

inline std::vector<int> channel_domain(const VariableSpec& spec) {
  std::vector<int> out;
  for (const auto& v : spec.values) out.push_back(static_cast<int>(std::lround(as_number(v))));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline bool intersects(const std::vector<int>& a, const std::vector<int>& b) {
  return std::any_of(a.begin(), a.end(), [&](int x) { return std::binary_search(b.begin(), b.end(), x); });
}

inline std::vector<int> merge(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

inline bool contains_zero(const VariableSpec& spec) {
  return std::any_of(spec.values.begin(), spec.values.end(), [](const ChoiceValue& v) { return as_number(v) == 0.0; });
}

inline void check_mbconv_values(const BlockGroup& g, const std::string& where) {
  for (Variable v : kAllVariables) {
    const auto& spec = g.var(v);
    const std::string name(variable_name(v));
    if (spec.values.empty()) throw ValidationError(where + ": variable '" + name + "' has no values");
    for (std::size_t i = 0; i < spec.values.size(); ++i)
      for (std::size_t j = i + 1; j < spec.values.size(); ++j)
        if (spec.values[i] == spec.values[j]) throw ValidationError(where + ": variable '" + name + "' has duplicate values");
    for (const auto& val : spec.values) {
      if (v == Variable::nonlinearity) {
        const auto* s = std::get_if<std::string>(&val);
        if (!s || (*s != "relu" && *s != "swish")) throw ValidationError(where + ": nonlinearity must be 'relu' or 'swish'");
        continue;
      }
      if (!std::holds_alternative<double>(val)) throw ValidationError(where + ": variable '" + name + "' must be numeric");
      const double x = std::get<double>(val);
      if (!(x >= 0)) throw ValidationError(where + ": negative value for '" + name + "'");
      if (v == Variable::channel && (x < 1 || x != std::floor(x))) throw ValidationError(where + ": channel must be a positive integer");
      if (v == Variable::expansion && x <= 0) throw ValidationError(where + ": expansion must be positive");
      if (v == Variable::kernel && x != 0 && (x != std::floor(x) || static_cast<long>(x) % 2 == 0))
        throw ValidationError(where + ": kernel must be 0 (skip) or an odd size");
      if (v == Variable::splits && x != std::floor(x)) throw ValidationError(where + ": splits must be integral");
    }
  }
  if (!g.var(Variable::kernel).searchable && contains_zero(g.var(Variable::kernel)))
    throw ValidationError(where + ": a fixed kernel of 0 removes the block; drop the group instead");
}

}  // namespace detail

inline void SearchSpace::build() {
  if (input_resolution_ < 1) throw ValidationError("input_resolution must be >= 1");
  if (input_channels_ < 1) throw ValidationError("input_channels must be >= 1");
  if (groups_.empty()) throw ValidationError("space has no groups");

  std::vector<int> in_domain{input_channels_};
  int resolution = input_resolution_;

  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const auto& g = groups_[gi];
    const std::string where = "group " + std::to_string(gi);
    if (g.repeat < 1) throw ValidationError(where + ": repeat must be >= 1");
    if (g.stride != 1 && g.stride != 2) throw ValidationError(where + ": stride must be 1 or 2");
    if (g.declared_in_channels && *g.declared_in_channels != in_domain.back()) {
      throw ValidationError(where + ": channel discontinuity (declares input " + std::to_string(*g.declared_in_channels) +
                            ", predecessor provides up to " + std::to_string(in_domain.back()) + ")");
    }
    if (g.declared_in_resolution && *g.declared_in_resolution != resolution) {
      throw ValidationError(where + ": resolution discontinuity (declares " + std::to_string(*g.declared_in_resolution) +
                            ", predecessor provides " + std::to_string(resolution) + ")");
    }

    switch (g.op) {
      case Operator::avgpool:
        resolution = 1;
        continue;
      case Operator::fc:
      case Operator::conv:
        if (g.var(Variable::channel).values.size() != 1) throw ValidationError(where + ": fixed layer needs one channel value");
        if (g.op == Operator::conv && g.var(Variable::kernel).values.size() != 1)
          throw ValidationError(where + ": fixed conv needs one kernel value");
        in_domain = detail::channel_domain(g.var(Variable::channel));
        resolution = g.op == Operator::fc ? 1 : (resolution + g.stride - 1) / g.stride;
        continue;
      case Operator::mbconv:
        break;
    }

    detail::check_mbconv_values(g, where);
    const auto out_channels = detail::channel_domain(g.var(Variable::channel));
    const bool has_skip = detail::contains_zero(g.var(Variable::kernel));

    auto add_position = [&](int repeat_index, std::size_t count, const std::vector<int>& block_in) {
      Position p;
      p.group = gi;
      p.first_block = blocks_.size();
      p.block_count = count;
      p.stride = repeat_index == 0 ? g.stride : 1;
      p.skip_legal = p.stride == 1 && detail::intersects(block_in, out_channels);
      for (Variable v : kAllVariables) {
        const auto& spec = g.var(v);
        if (!spec.searchable) continue;
        ChoiceSet cs{v, spec.values};
        if (v == Variable::kernel && options_.prune_illegal_skip && !p.skip_legal) {
          std::erase_if(cs.values, [](const ChoiceValue& x) { return as_number(x) == 0.0; });
          if (cs.values.empty()) throw ValidationError(where + ": kernel domain is empty once the illegal skip is removed");
        }
        p.variables.push_back(std::move(cs));
      }
      for (std::size_t r = 0; r < count; ++r) {
        const int ri = repeat_index + static_cast<int>(r);
        blocks_.push_back(BlockSlot{gi, ri, positions_.size(), ri == 0 ? g.stride : 1});
      }
      positions_.push_back(std::move(p));
      return positions_.back().skip_legal;
    };

    if (!g.searchable()) {
      in_domain = out_channels;
    } else if (g.sharing == Sharing::per_group || g.repeat == 1) {
      const bool skip = add_position(0, static_cast<std::size_t>(g.repeat), in_domain) && has_skip;
      in_domain = skip ? detail::merge(out_channels, in_domain) : out_channels;
    } else {
      for (int r = 0; r < g.repeat; ++r) {
        const bool skip = add_position(r, 1, in_domain) && has_skip;
        in_domain = skip ? detail::merge(out_channels, in_domain) : out_channels;
      }
    }
    resolution = (resolution + g.stride - 1) / g.stride;
  }

  if (positions_.empty()) throw ValidationError("space has no searchable positions");
}

// ---------------------------------------------------------------------------
// Space documents

namespace detail {

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(path + key, "missing required field");
  return obj.at(key);
}

inline int require_int(const json& obj, const std::string& key, const std::string& path, std::optional<int> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ParseError(path + key, "missing required field");
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ParseError(path + key, "expected an integer");
  const double d = v.get<double>();
  if (d != std::floor(d)) throw ParseError(path + key, "expected an integer");
  return static_cast<int>(d);
}

inline ChoiceValue scalar_value(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw ParseError(field, "expected a number or string");
}

inline VariableSpec parse_variable(const json& v, const std::string& field) {
  VariableSpec spec;
  if (v.is_array()) {
    if (v.empty()) throw ParseError(field, "choice list is empty");
    spec.searchable = true;
    for (std::size_t i = 0; i < v.size(); ++i) spec.values.push_back(scalar_value(v[i], field + "[" + std::to_string(i) + "]"));
  } else if (v.is_object()) {
    for (const char* k : {"min", "max", "step"})
      if (!v.contains(k) || !v.at(k).is_number()) throw ParseError(field + "." + k, "range needs numeric min, max and step");
    spec.searchable = true;
    try {
      for (double x : expand_range(v.at("min").get<double>(), v.at("max").get<double>(), v.at("step").get<double>()))
        spec.values.emplace_back(x);
    } catch (const ValidationError& e) {
      throw ParseError(field, e.what());
    }
  } else {
    spec.values.push_back(scalar_value(v, field));
  }
  return spec;
}

}  // namespace detail

inline SearchSpace space_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("", "space document must be an object");
  const std::string name = doc.value("name", std::string("unnamed"));
  const int resolution = detail::require_int(doc, "input_resolution", "");
  const int channels = detail::require_int(doc, "input_channels", "");
  const auto& jgroups = detail::require(doc, "groups", "");
  if (!jgroups.is_array()) throw ParseError("groups", "expected a list");

  std::vector<BlockGroup> groups;
  for (std::size_t i = 0; i < jgroups.size(); ++i) {
    const auto& jg = jgroups[i];
    const std::string path = "groups[" + std::to_string(i) + "].";
    if (!jg.is_object()) throw ParseError(path.substr(0, path.size() - 1), "expected an object");
    BlockGroup g;
    const auto op = detail::require(jg, "operator", path);
    if (!op.is_string()) throw ParseError(path + "operator", "expected a string");
    const auto ops = op.get<std::string>();
    if (ops == "conv") g.op = Operator::conv;
    else if (ops == "mbconv") g.op = Operator::mbconv;
    else if (ops == "avgpool") g.op = Operator::avgpool;
    else if (ops == "fc") g.op = Operator::fc;
    else throw ParseError(path + "operator", "unknown operator '" + ops + "'");
    g.repeat = detail::require_int(jg, "repeat", path, 1);
    g.stride = detail::require_int(jg, "stride", path, 1);
    if (jg.contains("sharing")) {
      const auto s = jg.at("sharing").get<std::string>();
      if (s == "per-group") g.sharing = Sharing::per_group;
      else if (s == "per-block") g.sharing = Sharing::per_block;
      else throw ParseError(path + "sharing", "expected 'per-group' or 'per-block'");
    }
    if (jg.contains("input")) {
      const auto& in = jg.at("input");
      if (in.contains("channels")) g.declared_in_channels = detail::require_int(in, "channels", path + "input.");
      if (in.contains("resolution")) g.declared_in_resolution = detail::require_int(in, "resolution", path + "input.");
    }
    switch (g.op) {
      case Operator::mbconv:
        for (Variable v : kAllVariables) {
          const std::string key(variable_name(v));
          g.var(v) = detail::parse_variable(detail::require(jg, key, path), path + key);
        }
        break;
      case Operator::conv:
        g.var(Variable::kernel).values = {static_cast<double>(detail::require_int(jg, "kernel", path))};
        g.var(Variable::channel).values = {static_cast<double>(detail::require_int(jg, "channel", path))};
        break;
      case Operator::fc:
        g.var(Variable::channel).values = {static_cast<double>(detail::require_int(jg, "channel", path))};
        break;
      case Operator::avgpool:
        break;
    }
    groups.push_back(std::move(g));
  }
  return SearchSpace(name, resolution, channels, std::move(groups));
}

inline SearchSpace parse_space(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("malformed document: ") + e.what());
  }
  return space_from_json(doc);
}

// Canonical document; ranges are written out as explicit lists.
inline json space_to_json(const SearchSpace& space) {
  json doc;
  doc["name"] = space.name();
  doc["input_resolution"] = space.input_resolution();
  doc["input_channels"] = space.input_channels();
  json groups = json::array();
  for (const auto& g : space.groups()) {
    json jg;
    jg["operator"] = std::string(operator_name(g.op));
    if (g.op != Operator::avgpool) {
      jg["repeat"] = g.repeat;
      jg["stride"] = g.stride;
    }
    if (g.declared_in_channels || g.declared_in_resolution) {
      json in;
      if (g.declared_in_channels) in["channels"] = *g.declared_in_channels;
      if (g.declared_in_resolution) in["resolution"] = *g.declared_in_resolution;
      jg["input"] = in;
    }
    auto write = [&](Variable v) {
      const auto& spec = g.var(v);
      if (spec.searchable) {
        json arr = json::array();
        for (const auto& x : spec.values) arr.push_back(to_json(x));
        jg[std::string(variable_name(v))] = arr;
      } else {
        jg[std::string(variable_name(v))] = to_json(spec.values.front());
      }
    };
    switch (g.op) {
      case Operator::mbconv:
        jg["sharing"] = g.sharing == Sharing::per_group ? "per-group" : "per-block";
        for (Variable v : kAllVariables) write(v);
        break;
      case Operator::conv:
        write(Variable::kernel);
        write(Variable::channel);
        break;
      case Operator::fc:
        write(Variable::channel);
        break;
      case Operator::avgpool:
        break;
    }
    groups.push_back(std::move(jg));
  }
  doc["groups"] = std::move(groups);
  return doc;
}

inline std::string space_hash(const SearchSpace& space) { return hex64(fnv1a(space_to_json(space).dump())); }

// ---------------------------------------------------------------------------

inline std::vector<std::string> validate_architecture(const SearchSpace& space, const Architecture& arch) {
  std::vector<std::string> out;
  if (arch.choices.size() != space.num_positions()) {
    out.push_back("architecture has " + std::to_string(arch.choices.size()) + " positions, space has " +
                  std::to_string(space.num_positions()));
    return out;
  }
  for (std::size_t l = 0; l < space.num_positions(); ++l) {
    const auto& p = space.position(l);
    const auto& tuple = arch.choices[l];
    if (tuple.size() != p.variables.size()) {
      out.push_back("position " + std::to_string(l) + " has " + std::to_string(tuple.size()) + " choices, expected " +
                    std::to_string(p.variables.size()));
      continue;
    }
    bool in_range = true;
    for (std::size_t m = 0; m < tuple.size(); ++m) {
      if (tuple[m] >= p.variables[m].size()) {
        out.push_back("index out of range at position " + std::to_string(l) + " (variable " +
                      std::string(variable_name(p.variables[m].variable)) + ")");
        in_range = false;
      }
    }
    if (!in_range) continue;
    if (as_number(space.value(arch, l, Variable::kernel)) == 0.0 && !p.skip_legal) {
      out.push_back(p.stride != 1 ? "skip illegal under stride " + std::to_string(p.stride) + " at position " + std::to_string(l)
                                  : "skip illegal: channel mismatch at position " + std::to_string(l));
    }
  }
  return out;
}

struct SpaceSize {
  double log10 = 0.0;
  std::string decimal;                // exact product
  std::optional<std::uint64_t> exact;  // set when <= 1e18
};

inline SpaceSize space_size(const SearchSpace& space) {
  boost::multiprecision::cpp_int n = 1;
  double lg = 0.0;
  for (const auto& p : space.positions()) {
    n *= p.joint_cardinality();
    lg += std::log10(static_cast<double>(p.joint_cardinality()));
  }
  SpaceSize s;
  s.log10 = lg;
  s.decimal = n.str();
  if (n <= boost::multiprecision::cpp_int(1000000000000000000ull)) s.exact = static_cast<std::uint64_t>(n);
  return s;
}

// Calls fn for every architecture in lexicographic index order.
inline void for_each_architecture(const SearchSpace& space, const std::function<void(const Architecture&)>& fn) {
  Architecture a;
  for (const auto& p : space.positions()) a.choices.emplace_back(p.variables.size(), 0u);
  while (true) {
    fn(a);
    std::size_t l = a.choices.size();
    bool carried = true;
    while (carried && l-- > 0) {
      std::size_t m = a.choices[l].size();
      while (carried && m-- > 0) {
        if (++a.choices[l][m] < space.position(l).variables[m].size()) carried = false;
        else a.choices[l][m] = 0;
      }
    }
    if (carried) return;
  }
}

inline Architecture uniform_architecture(const SearchSpace& space, Rng& rng) {
  Architecture a;
  for (const auto& p : space.positions()) {
    auto& t = a.choices.emplace_back();
    for (const auto& cs : p.variables) t.push_back(static_cast<std::uint32_t>(rng.below(cs.size())));
  }
  return a;
}

}  // namespace fpnas
