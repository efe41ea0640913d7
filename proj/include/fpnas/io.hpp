#pragma once

#include <boost/uuid/detail/sha1.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fpnas/presets.hpp"
#include "fpnas/search.hpp"
#include "fpnas/supernet.hpp"

namespace fpnas {

// ---------------------------------------------------------------------------
// Run configuration

struct EvaluatorSpec {
  std::string kind = "oracle";
  std::optional<std::uint64_t> seed;  // defaults to the run seed
  OracleConfig oracle;
  SupernetConfig supernet;
};

struct RunConfig {
  json space = "fbnetv2-f";  // preset name, path, or inline document
  std::filesystem::path base_dir;
  SearchConfig search;
  EvaluatorSpec evaluator;
  json document;  // effective config after overrides
};

namespace detail {

inline std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

template <class T>
T get_as(const json& v, const std::string& field) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ParseError(field, "wrong type: " + v.dump());
  }
}

inline std::uint64_t get_count(const json& v, const std::string& field) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) throw ParseError(field, "expected a non-negative integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < 0) throw ParseError(field, "must be non-negative");
  return v.get<std::uint64_t>();
}

inline double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ParseError(field, "expected a number");
  return v.get<double>();
}

// Rejects keys the schema does not know, so misspelled overrides fail loudly.
inline void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path.empty() ? "config" : path, "expected an object");
  for (const auto& [k, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ParseError(join_path(path, k), "unknown key");
  }
}

inline Schedule parse_schedule_kind(const std::string& s, const std::string& field) {
  if (s == "mixed") return Schedule::mixed;
  if (s == "joint_only" || s == "joint") return Schedule::joint_only;
  if (s == "factorized_only" || s == "factorized") return Schedule::factorized_only;
  throw ParseError(field, "unknown schedule '" + s + "'");
}

}  // namespace detail

// Parses a JSON value written on the command line; bare words become strings.
inline json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

// Applies "a.b.c=value", creating intermediate objects.
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ParseError("--override", "expected key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  json* node = &doc;
  std::size_t begin = 0;
  while (true) {
    const auto dot = key.find('.', begin);
    const std::string part = key.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
    if (part.empty()) throw ParseError("--override", "empty key segment in '" + key + "'");
    if (!node->is_object()) *node = json::object();
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    begin = dot + 1;
  }
  *node = parse_override_value(assignment.substr(eq + 1));
}

inline RunConfig run_config_from_json(const json& doc, std::filesystem::path base_dir = {}) {
  using namespace detail;
  check_keys(doc,
             {"space", "seed", "epochs", "warmup_epochs", "steps_per_epoch", "schedule", "sampling", "beta",
              "target_flops", "alpha_optimizer", "joint_cap", "cost_model", "evaluator"},
             "");
  RunConfig rc;
  rc.document = doc;
  rc.base_dir = std::move(base_dir);
  auto& s = rc.search;
  if (doc.contains("space")) {
    rc.space = doc["space"];
    if (!rc.space.is_string() && !rc.space.is_object()) throw ParseError("space", "expected a preset name, path or document");
  }
  if (doc.contains("seed")) s.seed = get_count(doc["seed"], "seed");
  if (doc.contains("epochs")) s.epochs = get_count(doc["epochs"], "epochs");
  if (doc.contains("warmup_epochs")) s.warmup_epochs = get_count(doc["warmup_epochs"], "warmup_epochs");
  if (doc.contains("steps_per_epoch")) s.steps_per_epoch = get_count(doc["steps_per_epoch"], "steps_per_epoch");
  if (doc.contains("schedule")) {
    const auto& j = doc["schedule"];
    if (j.is_string()) {
      s.schedule = parse_schedule_kind(j.get<std::string>(), "schedule");
    } else {
      check_keys(j, {"kind", "theta"}, "schedule");
      if (j.contains("kind")) s.schedule = parse_schedule_kind(get_as<std::string>(j["kind"], "schedule.kind"), "schedule.kind");
      if (j.contains("theta") && !j["theta"].is_null()) s.theta = get_count(j["theta"], "schedule.theta");
    }
  }
  if (doc.contains("sampling")) {
    const auto& j = doc["sampling"];
    check_keys(j, {"kind", "k", "lambda", "k_min", "k_max"}, "sampling");
    if (j.contains("kind")) {
      const auto kind = get_as<std::string>(j["kind"], "sampling.kind");
      if (kind == "fixed") s.sampling.kind = SamplingPolicy::Kind::fixed;
      else if (kind == "adaptive") s.sampling.kind = SamplingPolicy::Kind::adaptive;
      else throw ParseError("sampling.kind", "expected 'fixed' or 'adaptive'");
    }
    if (j.contains("k")) s.sampling.k = get_count(j["k"], "sampling.k");
    if (j.contains("lambda")) s.sampling.lambda = get_number(j["lambda"], "sampling.lambda");
    if (j.contains("k_min")) s.sampling.k_min = get_count(j["k_min"], "sampling.k_min");
    if (j.contains("k_max")) s.sampling.k_max = get_count(j["k_max"], "sampling.k_max");
  }
  if (doc.contains("beta")) s.beta = get_number(doc["beta"], "beta");
  if (doc.contains("target_flops") && !doc["target_flops"].is_null())
    s.target_flops = get_number(doc["target_flops"], "target_flops");
  if (doc.contains("alpha_optimizer")) {
    const auto& j = doc["alpha_optimizer"];
    check_keys(j, {"lr", "beta1", "beta2", "eps"}, "alpha_optimizer");
    if (j.contains("lr")) s.adam.lr = get_number(j["lr"], "alpha_optimizer.lr");
    if (j.contains("beta1")) s.adam.beta1 = get_number(j["beta1"], "alpha_optimizer.beta1");
    if (j.contains("beta2")) s.adam.beta2 = get_number(j["beta2"], "alpha_optimizer.beta2");
    if (j.contains("eps")) s.adam.eps = get_number(j["eps"], "alpha_optimizer.eps");
  }
  if (doc.contains("joint_cap")) s.joint_cap = get_count(doc["joint_cap"], "joint_cap");
  if (doc.contains("cost_model")) {
    const auto& j = doc["cost_model"];
    check_keys(j, {"se_reduction_ratio", "swish_flops_per_element"}, "cost_model");
    if (j.contains("se_reduction_ratio")) {
      s.cost_model.se_reduction_ratio = static_cast<int>(get_count(j["se_reduction_ratio"], "cost_model.se_reduction_ratio"));
      if (s.cost_model.se_reduction_ratio < 1) throw ParseError("cost_model.se_reduction_ratio", "must be >= 1");
    }
    if (j.contains("swish_flops_per_element"))
      s.cost_model.swish_flops_per_element = get_count(j["swish_flops_per_element"], "cost_model.swish_flops_per_element");
  }
  if (doc.contains("evaluator")) {
    const auto& j = doc["evaluator"];
    if (!j.is_object()) throw ParseError("evaluator", "expected an object");
    auto& e = rc.evaluator;
    if (j.contains("kind")) e.kind = get_as<std::string>(j["kind"], "evaluator.kind");
    if (e.kind == "oracle") {
      check_keys(j, {"kind", "seed", "tau", "additive_scale", "pair_scale", "chain_scale", "synergy"}, "evaluator");
      if (j.contains("tau")) e.oracle.tau = get_number(j["tau"], "evaluator.tau");
      if (j.contains("additive_scale")) e.oracle.additive_scale = get_number(j["additive_scale"], "evaluator.additive_scale");
      if (j.contains("pair_scale")) e.oracle.pair_scale = get_number(j["pair_scale"], "evaluator.pair_scale");
      if (j.contains("chain_scale")) e.oracle.chain_scale = get_number(j["chain_scale"], "evaluator.chain_scale");
      if (j.contains("synergy")) e.oracle.synergy = get_number(j["synergy"], "evaluator.synergy");
      if (!(e.oracle.tau > 0.0)) throw ParseError("evaluator.tau", "must be positive");
    } else if (e.kind == "supernet") {
      check_keys(j,
                 {"kind", "seed", "input_dim", "classes", "train_size", "val_size", "separation", "batch_size", "lr"},
                 "evaluator");
      auto& sn = e.supernet;
      if (j.contains("input_dim")) sn.data.dim = get_count(j["input_dim"], "evaluator.input_dim");
      if (j.contains("classes")) sn.data.classes = get_count(j["classes"], "evaluator.classes");
      if (j.contains("train_size")) sn.data.train_size = get_count(j["train_size"], "evaluator.train_size");
      if (j.contains("val_size")) sn.data.val_size = get_count(j["val_size"], "evaluator.val_size");
      if (j.contains("separation")) sn.data.separation = get_number(j["separation"], "evaluator.separation");
      if (j.contains("batch_size")) sn.batch_size = get_count(j["batch_size"], "evaluator.batch_size");
      if (j.contains("lr")) sn.lr = get_number(j["lr"], "evaluator.lr");
      if (sn.data.dim == 0 || sn.data.classes < 2 || sn.data.train_size == 0 || sn.data.val_size == 0)
        throw ParseError("evaluator", "supernet data needs input_dim >= 1, classes >= 2 and non-empty splits");
    } else {
      throw ParseError("evaluator.kind", "expected 'oracle' or 'supernet', got '" + e.kind + "'");
    }
    if (j.contains("seed")) e.seed = get_count(j["seed"], "evaluator.seed");
  }
  try {
    s.validate();
  } catch (const ValidationError& ex) {
    throw ParseError("config", ex.what());
  }
  return rc;
}

// A run config file, or a manifest written by a previous run (its embedded
// config is used, which makes the manifest a rerun recipe).
inline json read_config_document(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  if (doc.is_object() && doc.value("format", "") == "fpnas-manifest") {
    if (!doc.contains("config")) throw ParseError(path.string(), "manifest has no config");
    return doc["config"];
  }
  return doc;
}

inline SearchSpace resolve_space(const RunConfig& rc) {
  if (rc.space.is_object()) return space_from_json(rc.space);
  const auto name = rc.space.get<std::string>();
  if (preset_document(name)) return load_space(name);
  std::filesystem::path p(name);
  if (p.is_relative() && !rc.base_dir.empty() && !std::filesystem::exists(p)) p = rc.base_dir / p;
  return load_space(p.string());
}

inline std::unique_ptr<Evaluator> make_evaluator(const RunConfig& rc, const SearchSpace& space, std::uint64_t seed) {
  const std::uint64_t s = rc.evaluator.seed.value_or(seed);
  if (rc.evaluator.kind == "supernet") {
    auto cfg = rc.evaluator.supernet;
    cfg.seed = s;
    cfg.data.seed = derive_seed(s, 2);
    return std::make_unique<SupernetEvaluator>(space, cfg);
  }
  auto cfg = rc.evaluator.oracle;
  cfg.seed = s;
  return std::make_unique<TabularOracle>(space, cfg);
}

// ---------------------------------------------------------------------------
// Text formats

// Shortest round-trip representation; NaN becomes an empty field.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline constexpr std::string_view kTraceHeader =
    "epoch,step,entropy_nats,k,cumulative_samples,expected_cost,mean_val_loglik,sum_m,mpa_hash";

inline std::string trace_csv(const SearchTrace& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const auto& r : trace.steps) {
    out += std::to_string(r.epoch) + ',' + std::to_string(r.step) + ',' + format_double(r.entropy_nats) + ',' +
           std::to_string(r.k) + ',' + std::to_string(r.cumulative_samples) + ',' + format_double(r.expected_cost) + ',' +
           format_double(r.mean_val_loglik) + ',' + format_double(r.sum_m) + ',' + r.mpa_hash + '\n';
  }
  return out;
}

namespace detail {

// nlohmann writes NaN as null; read it back as NaN.
inline double nan_or(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

}  // namespace detail

// Wall time is left out so checkpoints are byte-reproducible.
inline json step_record_to_json(const StepRecord& r) {
  return json{{"epoch", r.epoch},
              {"step", r.step},
              {"warmup", r.warmup},
              {"mode", mode_name(r.mode)},
              {"entropy_nats", r.entropy_nats},
              {"k", r.k},
              {"cumulative_samples", r.cumulative_samples},
              {"expected_cost", r.expected_cost},
              {"mean_val_loglik", r.mean_val_loglik},
              {"mean_train_loglik", r.mean_train_loglik},
              {"sum_m", r.sum_m},
              {"min_m", r.min_m},
              {"max_m", r.max_m},
              {"loss", r.loss},
              {"mpa_hash", r.mpa_hash}};
}

inline StepRecord step_record_from_json(const json& j) {
  using detail::nan_or;
  StepRecord r;
  r.epoch = j.at("epoch").get<std::size_t>();
  r.step = j.at("step").get<std::uint64_t>();
  r.warmup = j.at("warmup").get<bool>();
  r.mode = j.at("mode").get<std::string>() == "joint" ? DistMode::joint : DistMode::factorized;
  r.entropy_nats = nan_or(j.at("entropy_nats"));
  r.k = j.at("k").get<std::size_t>();
  r.cumulative_samples = j.at("cumulative_samples").get<std::uint64_t>();
  r.expected_cost = nan_or(j.at("expected_cost"));
  r.mean_val_loglik = nan_or(j.at("mean_val_loglik"));
  r.mean_train_loglik = nan_or(j.at("mean_train_loglik"));
  r.sum_m = nan_or(j.at("sum_m"));
  r.min_m = nan_or(j.at("min_m"));
  r.max_m = nan_or(j.at("max_m"));
  r.loss = nan_or(j.at("loss"));
  r.mpa_hash = j.at("mpa_hash").get<std::string>();
  return r;
}

inline json distribution_to_json(const ArchDistribution& d) {
  return json{{"mode", mode_name(d.mode())}, {"shape", d.shape()}, {"logits", d.blocks()}};
}

inline ArchDistribution distribution_from_json(const json& j) {
  const auto mode = j.at("mode").get<std::string>() == "joint" ? DistMode::joint : DistMode::factorized;
  return ArchDistribution::from_blocks(j.at("shape").get<Shape>(), mode, j.at("logits").get<Blocks>());
}

inline json optimizer_to_json(const OptimizerState& s) {
  return json{{"lr", s.config.lr},
              {"beta1", s.config.beta1},
              {"beta2", s.config.beta2},
              {"eps", s.config.eps},
              {"step", s.step},
              {"first_moment", s.first_moment},
              {"second_moment", s.second_moment}};
}

inline OptimizerState optimizer_from_json(const json& j) {
  OptimizerState s;
  s.config = AdamConfig{j.at("lr").get<double>(), j.at("beta1").get<double>(), j.at("beta2").get<double>(),
                        j.at("eps").get<double>()};
  s.step = j.at("step").get<std::uint64_t>();
  s.first_moment = j.at("first_moment").get<Blocks>();
  s.second_moment = j.at("second_moment").get<Blocks>();
  return s;
}

inline json search_state_to_json(const Search::State& st) {
  json steps = json::array();
  for (const auto& r : st.trace.steps) steps.push_back(step_record_to_json(r));
  json events = json::array();
  for (const auto& e : st.trace.events) events.push_back({{"step", e.step}, {"what", e.what}});
  return json{{"distribution", distribution_to_json(st.distribution)},
              {"optimizer", optimizer_to_json(st.optimizer)},
              {"rng", st.rng_state},
              {"step", st.step},
              {"cumulative_samples", st.cumulative_samples},
              {"converted", st.converted},
              {"trace", steps},
              {"events", events}};
}

inline Search::State search_state_from_json(const json& j) {
  Search::State st;
  st.distribution = distribution_from_json(j.at("distribution"));
  st.optimizer = optimizer_from_json(j.at("optimizer"));
  st.rng_state = j.at("rng").get<std::string>();
  st.step = j.at("step").get<std::uint64_t>();
  st.cumulative_samples = j.at("cumulative_samples").get<std::uint64_t>();
  st.converted = j.at("converted").get<bool>();
  for (const auto& r : j.at("trace")) st.trace.steps.push_back(step_record_from_json(r));
  for (const auto& e : j.at("events")) st.trace.events.push_back({e.at("step").get<std::uint64_t>(), e.at("what").get<std::string>()});
  return st;
}

// ---------------------------------------------------------------------------
// Architecture documents

inline json architecture_values(const SearchSpace& space, const Architecture& a) {
  json out = json::array();
  for (std::size_t l = 0; l < space.num_positions(); ++l) {
    json pos = json::object();
    for (auto v : kAllVariables) pos[std::string(variable_name(v))] = to_json(space.value(a, l, v));
    out.push_back(std::move(pos));
  }
  return out;
}

inline json architecture_document(const SearchSpace& space, const Architecture& a, const CostModel& model = {}) {
  return json{{"space", space.name()},
              {"space_hash", space_hash(space)},
              {"hash", arch_hash(a)},
              {"choices", a.choices},
              {"values", architecture_values(space, a)},
              {"cost", cost_report_to_json(arch_flops(space, a, model))}};
}

namespace detail {

inline bool same_value(const ChoiceValue& have, const json& want) {
  if (want.is_string()) return std::holds_alternative<std::string>(have) && std::get<std::string>(have) == want.get<std::string>();
  if (want.is_number()) return std::holds_alternative<double>(have) && std::abs(std::get<double>(have) - want.get<double>()) < 1e-9;
  return false;
}

}  // namespace detail

// Accepts {"choices": [[...]]} (indices) or {"values": [{variable: value}]},
// optionally wrapped as {"architecture": {...}}.
inline Architecture architecture_from_json(const SearchSpace& space, const json& doc, const std::string& where = "architecture") {
  const json& j = doc.contains("architecture") ? doc["architecture"] : doc;
  Architecture a;
  if (j.contains("choices")) {
    try {
      a.choices = j["choices"].get<std::vector<std::vector<std::uint32_t>>>();
    } catch (const json::exception&) {
      throw ParseError(where + ".choices", "expected a list of index lists");
    }
  } else if (j.contains("values")) {
    const auto& vals = j["values"];
    if (!vals.is_array() || vals.size() != space.num_positions())
      throw ParseError(where + ".values", "expected one entry per position (" + std::to_string(space.num_positions()) + ")");
    for (std::size_t l = 0; l < space.num_positions(); ++l) {
      const auto& pos = space.position(l);
      auto& t = a.choices.emplace_back();
      for (const auto& cs : pos.variables) {
        const std::string name(variable_name(cs.variable));
        const std::string field = where + ".values[" + std::to_string(l) + "]." + name;
        if (!vals[l].contains(name)) throw ParseError(field, "missing");
        std::optional<std::uint32_t> idx;
        for (std::size_t c = 0; c < cs.size(); ++c)
          if (detail::same_value(cs[c], vals[l][name])) idx = static_cast<std::uint32_t>(c);
        if (!idx) throw ParseError(field, "value " + vals[l][name].dump() + " is not a choice here");
        t.push_back(*idx);
      }
    }
  } else {
    throw ParseError(where, "expected 'choices' or 'values'");
  }
  return a;
}

// ---------------------------------------------------------------------------
// Files

// Writes through a temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw RuntimeError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw RuntimeError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

// Git blob id: sha1("blob <size>\0" + content).
inline std::string git_blob_hash(std::string_view content) {
  boost::uuids::detail::sha1 h;
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  h.process_bytes(header.data(), header.size());
  h.process_bytes(content.data(), content.size());
  unsigned int digest[5];
  h.get_digest(digest);
  char buf[41];
  for (int i = 0; i < 5; ++i) std::snprintf(buf + 8 * i, 9, "%08x", digest[i]);
  return std::string(buf, 40);
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace fpnas
