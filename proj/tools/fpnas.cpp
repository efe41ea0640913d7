// fpnas command-line tool: search, resume, space-stats, flops, compare.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "fpnas/io.hpp"

namespace fs = std::filesystem;
using namespace fpnas;

namespace {

// Flags shared by search and compare; each one maps onto a config key.
struct RunFlags {
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> evaluator, schedule;
  std::optional<double> lambda, beta, target_flops;
  std::optional<std::size_t> k, theta;

  void attach(CLI::App* app) {
    app->add_option("--override", overrides, "Set a config key, e.g. sampling.lambda=0.3 (repeatable)");
    app->add_option("--seed", seed, "Run seed");
    app->add_option("--evaluator", evaluator, "Evaluator kind: oracle or supernet");
    app->add_option("--schedule", schedule, "mixed, joint_only or factorized_only");
    app->add_option("--lambda", lambda, "Adaptive sampling: K = lambda * entropy");
    app->add_option("--k", k, "Fixed sampling with K samples per step");
    app->add_option("--beta", beta, "Cost weight");
    app->add_option("--target-flops", target_flops, "FLOPS target");
    app->add_option("--theta", theta, "Conversion epoch for the mixed schedule");
  }

  void apply(json& doc) const {
    for (const auto& o : overrides) apply_override(doc, o);
    if (seed) doc["seed"] = *seed;
    if (evaluator) apply_override(doc, "evaluator.kind=" + json(*evaluator).dump());
    if (schedule) apply_override(doc, "schedule.kind=" + json(*schedule).dump());
    if (theta) apply_override(doc, "schedule.theta=" + std::to_string(*theta));
    if (lambda) {
      apply_override(doc, "sampling.kind=\"adaptive\"");
      doc["sampling"]["lambda"] = *lambda;
    }
    if (k) {
      apply_override(doc, "sampling.kind=\"fixed\"");
      doc["sampling"]["k"] = *k;
    }
    if (beta) doc["beta"] = *beta;
    if (target_flops) doc["target_flops"] = *target_flops;
  }
};

// A bare schedule string cannot carry sub-keys; overrides need the object form.
json normalise(json doc) {
  if (doc.is_object() && doc.contains("schedule") && doc["schedule"].is_string())
    doc["schedule"] = json{{"kind", doc["schedule"]}};
  return doc;
}

RunConfig load_run_config(const fs::path& path, const RunFlags& flags) {
  auto doc = normalise(read_config_document(path));
  if (!doc.is_object()) throw ParseError(path.string(), "config must be a JSON object");
  flags.apply(doc);
  return run_config_from_json(doc, path.parent_path());
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Effective config with the space document embedded, so the snapshot alone
// reproduces the run.
json snapshot(const RunConfig& rc, const SearchSpace& space) {
  auto doc = rc.document;
  doc["space"] = space_to_json(space);
  return doc;
}

json checkpoint_document(const json& config, const SearchSpace& space, const Search& s, const Evaluator& ev) {
  return json{{"format", "fpnas-checkpoint"},
              {"version", 1},
              {"config", config},
              {"space_hash", space_hash(space)},
              {"state", search_state_to_json(s.state())},
              {"evaluator", ev.state()}};
}

struct Outputs {
  fs::path dir;
  json hashes = json::object();

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(dir / name, content);
    hashes[name] = git_blob_hash(content);
  }
};

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw RuntimeError("cannot create output directory " + dir.string());
}

struct StepLimits {
  std::optional<std::uint64_t> stop_after;
  std::uint64_t checkpoint_every = 0;
};

int drive(Search& s, Evaluator& ev, const json& config, const SearchSpace& space, const fs::path& out_dir,
          const StepLimits& limits, const std::string& command, bool quiet) {
  const auto started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  Outputs out{out_dir};
  std::uint64_t executed = 0;
  while (!s.done()) {
    if (limits.stop_after && executed >= *limits.stop_after) break;
    s.step();
    ++executed;
    if (limits.checkpoint_every && s.current_step() % limits.checkpoint_every == 0 && !s.done())
      write_file_atomic(out_dir / "checkpoint.json", dump_json(checkpoint_document(config, space, s, ev)));
  }
  out.write("trace.csv", trace_csv(s.trace()));
  out.write("checkpoint.json", dump_json(checkpoint_document(config, space, s, ev)));
  std::optional<SearchResult> result;
  if (s.done()) {
    result = s.result();
    auto doc = architecture_document(space, result->architecture, s.config().cost_model);
    doc["score"] = result->score;
    doc["evaluator"] = ev.kind();
    doc["final_entropy_nats"] = entropy(result->distribution);
    doc["cumulative_samples"] = result->trace.cumulative_samples();
    out.write("architecture.json", dump_json(doc));
  }
  json events = json::array();
  for (const auto& e : s.trace().events) events.push_back({{"step", e.step}, {"what", e.what}});
  json manifest{{"format", "fpnas-manifest"},
                {"version", 1},
                {"command", command},
                {"config", config},
                {"space_hash", space_hash(space)},
                {"seeds", json::array({s.config().seed})},
                {"completed", s.done()},
                {"steps", s.current_step()},
                {"events", events},
                {"outputs", out.hashes},
                {"timing",
                 {{"started_utc", started},
                  {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}}}};
  write_file_atomic(out_dir / "manifest.json", dump_json(manifest));

  if (!quiet) {
    if (result) {
      std::cout << "selected " << serialize(result->architecture) << " (hash " << arch_hash(result->architecture) << ")\n"
                << "score " << format_double(result->score) << ", flops " << result->cost.total_flops
                << ", samples " << result->trace.cumulative_samples() << ", final entropy "
                << format_double(entropy(result->distribution)) << " nats\n";
    } else {
      std::cout << "stopped at step " << s.current_step() << " of " << s.config().total_steps() << "; resume with: fpnas resume --out "
                << out_dir.string() << "\n";
    }
    std::cout << "outputs written to " << out_dir.string() << "\n";
  }
  return 0;
}

int cmd_search(const fs::path& config_path, const RunFlags& flags, const fs::path& out_dir, const StepLimits& limits,
               bool quiet) {
  const auto rc = load_run_config(config_path, flags);
  const auto space = resolve_space(rc);
  const auto config = snapshot(rc, space);
  auto ev = make_evaluator(rc, space, rc.search.seed);
  prepare_out_dir(out_dir);
  Search s(rc.search, space, *ev);
  return drive(s, *ev, config, space, out_dir, limits, "search", quiet);
}

int cmd_resume(const fs::path& out_dir, const StepLimits& limits, bool quiet) {
  const auto path = out_dir / "checkpoint.json";
  json ck;
  try {
    ck = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  if (ck.value("format", "") != "fpnas-checkpoint") throw ParseError(path.string(), "not a checkpoint");
  const auto rc = run_config_from_json(ck.at("config"));
  const auto space = resolve_space(rc);
  if (space_hash(space) != ck.at("space_hash").get<std::string>()) throw ParseError(path.string(), "space hash mismatch");
  auto ev = make_evaluator(rc, space, rc.search.seed);
  Search s(rc.search, space, *ev);
  try {
    ev->load_state(ck.at("evaluator"));
    s.restore(search_state_from_json(ck.at("state")));
  } catch (const json::exception& e) {
    throw ParseError(path.string(), std::string("malformed checkpoint: ") + e.what());
  }
  return drive(s, *ev, ck.at("config"), space, out_dir, limits, "resume", quiet);
}

std::string choice_list(const VariableSpec& spec) {
  if (!spec.searchable) return to_string(spec.values.front());
  std::string s = "{";
  for (std::size_t i = 0; i < spec.values.size(); ++i) s += (i ? "," : "") + to_string(spec.values[i]);
  return s + "}";
}

std::string choice_list(const ChoiceSet& cs) {
  std::string s = "{";
  for (std::size_t i = 0; i < cs.size(); ++i) s += (i ? "," : "") + to_string(cs[i]);
  return s + "}";
}

int cmd_space_stats(const std::string& name, bool as_json) {
  const auto space = load_space(name);
  const auto size = space_size(space);
  std::size_t joint_total = 0, fact_total = 0;
  json positions = json::array();
  for (std::size_t l = 0; l < space.num_positions(); ++l) {
    const auto& p = space.position(l);
    std::size_t fact = 0;
    json vars = json::object();
    for (const auto& cs : p.variables) {
      fact += cs.size();
      json vals = json::array();
      for (const auto& v : cs.values) vals.push_back(to_json(v));
      vars[std::string(variable_name(cs.variable))] = vals;
    }
    joint_total += p.joint_cardinality();
    fact_total += fact;
    positions.push_back({{"position", l},
                         {"group", p.group},
                         {"blocks", p.block_count},
                         {"stride", p.stride},
                         {"variables", vars},
                         {"joint_parameters", p.joint_cardinality()},
                         {"factorized_parameters", fact}});
  }
  if (as_json) {
    std::cout << json{{"space", space.name()},
                      {"space_hash", space_hash(space)},
                      {"positions", positions},
                      {"joint_parameters", joint_total},
                      {"factorized_parameters", fact_total},
                      {"log10_size", size.log10},
                      {"size", size.decimal}}
                     .dump(2)
              << "\n";
    return 0;
  }
  std::cout << "space " << space.name() << " (hash " << space_hash(space) << ")\n"
            << "input " << space.input_resolution() << "x" << space.input_resolution() << "x" << space.input_channels()
            << ", searchable groups " << space.num_searchable_groups() << ", blocks " << space.blocks().size()
            << ", positions " << space.num_positions() << "\n\n";
  std::cout << std::left << std::setw(5) << "pos" << std::setw(7) << "group" << std::setw(8) << "blocks" << std::setw(8)
            << "stride";
  for (auto v : kAllVariables) std::cout << std::setw(v == Variable::expansion ? 34 : v == Variable::channel ? 34 : 16) << variable_name(v);
  std::cout << std::right << std::setw(8) << "joint" << std::setw(12) << "factorized" << "\n";
  for (std::size_t l = 0; l < space.num_positions(); ++l) {
    const auto& p = space.position(l);
    std::cout << std::left << std::setw(5) << l << std::setw(7) << p.group << std::setw(8) << p.block_count << std::setw(8)
              << p.stride;
    for (auto v : kAllVariables) {
      const auto slot = p.slot_of(v);
      const std::string text = slot ? choice_list(p.variables[*slot]) : choice_list(space.groups()[p.group].var(v));
      std::cout << std::setw(v == Variable::expansion ? 34 : v == Variable::channel ? 34 : 16) << text << ' ';
    }
    std::cout << std::right << std::setw(7) << positions[l]["joint_parameters"].get<std::size_t>() << std::setw(12)
              << positions[l]["factorized_parameters"].get<std::size_t>() << "\n";
  }
  std::cout << "\nparameters: joint " << joint_total << ", factorized " << fact_total;
  if (fact_total) std::cout << " (" << std::fixed << std::setprecision(1) << double(joint_total) / double(fact_total) << "x fewer)";
  std::cout << "\n" << std::defaultfloat << std::setprecision(6);
  std::cout << "space size: 10^" << std::fixed << std::setprecision(2) << size.log10 << " (" << size.decimal << ")\n";
  return 0;
}

int cmd_flops(const std::string& space_name, const fs::path& arch_path, std::optional<int> input_size, bool as_json) {
  auto space = load_space(space_name);
  if (input_size) {
    if (*input_size < 1) throw ParseError("--input-size", "must be positive");
    space = space.with_resolution(*input_size);
  }
  json doc;
  try {
    doc = json::parse(read_text_file(arch_path));
  } catch (const json::exception& e) {
    throw ParseError(arch_path.string(), std::string("invalid JSON: ") + e.what());
  }
  const auto arch = architecture_from_json(space, doc, arch_path.string());
  if (auto problems = validate_architecture(space, arch); !problems.empty()) throw ParseError(arch_path.string(), problems.front());
  const auto r = arch_flops(space, arch);
  if (as_json) {
    auto j = cost_report_to_json(r);
    json layers = json::array();
    for (std::size_t i = 0; i < r.layers.size(); ++i) {
      const auto& c = r.layers[i];
      layers.push_back({{"operator", operator_name(c.op)},
                        {"position", c.position},
                        {"in_channels", c.in_channels},
                        {"out_channels", c.out_channels},
                        {"hidden_channels", c.hidden_channels},
                        {"kernel", c.kernel},
                        {"stride", c.stride},
                        {"splits", c.splits},
                        {"swish", c.swish},
                        {"in_resolution", c.in_resolution},
                        {"out_resolution", c.out_resolution},
                        {"flops", r.layer_flops[i]}});
    }
    j["layers"] = layers;
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << std::left << std::setw(4) << "#" << std::setw(8) << "op" << std::setw(5) << "pos" << std::setw(12) << "channels"
            << std::setw(8) << "hidden" << std::setw(6) << "k" << std::setw(4) << "s" << std::setw(7) << "splits" << std::setw(7)
            << "act" << std::setw(10) << "res" << std::right << std::setw(14) << "flops" << "\n";
  for (std::size_t i = 0; i < r.layers.size(); ++i) {
    const auto& c = r.layers[i];
    std::cout << std::left << std::setw(4) << i << std::setw(8) << operator_name(c.op) << std::setw(5)
              << (c.position >= 0 ? std::to_string(c.position) : "-") << std::setw(12)
              << (std::to_string(c.in_channels) + "->" + std::to_string(c.out_channels)) << std::setw(8)
              << (c.op == Operator::mbconv ? std::to_string(c.hidden_channels) : "-") << std::setw(6)
              << (c.skip() ? std::string("skip") : std::to_string(c.kernel)) << std::setw(4) << c.stride << std::setw(7)
              << c.splits << std::setw(7) << (c.swish ? "swish" : "relu") << std::setw(10)
              << (std::to_string(c.in_resolution) + "->" + std::to_string(c.out_resolution)) << std::right << std::setw(14)
              << r.layer_flops[i] << "\n";
  }
  std::cout << "\nfixed layers: " << r.fixed_flops << "\n";
  for (const auto& p : r.per_position) std::cout << "position " << p.position << ": " << p.flops << "\n";
  std::cout << "total flops: " << r.total_flops << "\nparameters: " << r.parameter_count << "\n";
  return 0;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ParseError("--seeds", "bad seed '" + s + "'");
    return v;
  };
  while (std::getline(ss, part, ',')) {
    const auto dash = part.find('-');
    if (dash != std::string::npos) {
      const auto a = number(part.substr(0, dash)), b = number(part.substr(dash + 1));
      if (b < a) throw ParseError("--seeds", "empty range '" + part + "'");
      for (auto x = a; x <= b; ++x) seeds.push_back(x);
    } else {
      seeds.push_back(number(part));
    }
  }
  if (seeds.empty()) throw ParseError("--seeds", "no seeds given");
  return seeds;
}

std::string sampling_label(const SamplingPolicy& p) {
  std::ostringstream os;
  if (p.kind == SamplingPolicy::Kind::fixed) os << "FS(K=" << p.k << ")";
  else os << "AS(lambda=" << p.lambda << ")";
  return os.str();
}

std::string pm(const Summary& s, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << s.mean << " ± " << s.sd;
  return os.str();
}

int cmd_compare(const fs::path& dir, const std::string& seed_text, const RunFlags& flags, const fs::path& out_dir,
                std::size_t jobs) {
  if (!fs::is_directory(dir)) throw ParseError(dir.string(), "not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ParseError(dir.string(), "no *.json configs found");
  const auto seeds = parse_seeds(seed_text);

  struct Job {
    std::string name;
    RunConfig rc;
    std::unique_ptr<SearchSpace> space;
  };
  std::vector<Job> configs;
  for (const auto& f : files) {
    auto rc = load_run_config(f, flags);
    auto space = std::make_unique<SearchSpace>(resolve_space(rc));
    configs.push_back({f.stem().string(), std::move(rc), std::move(space)});
  }

  struct Run {
    double samples, wall, score, entropy;
    std::string hash;
  };
  std::vector<std::vector<Run>> runs(configs.size(), std::vector<Run>(seeds.size()));
  auto run_one = [&](std::size_t c, std::size_t i) {
    auto cfg = configs[c].rc.search;
    cfg.seed = seeds[i];
    auto ev = make_evaluator(configs[c].rc, *configs[c].space, seeds[i]);
    const auto r = run_search(cfg, *configs[c].space, *ev);
    runs[c][i] = Run{double(r.trace.cumulative_samples()), r.trace.wall_seconds(), r.score, entropy(r.distribution),
                     arch_hash(r.architecture)};
  };
  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t c = 0; c < configs.size(); ++c)
    for (std::size_t i = 0; i < seeds.size(); ++i) work.emplace_back(c, i);
  jobs = std::max<std::size_t>(1, jobs);
  for (std::size_t start = 0; start < work.size(); start += jobs) {
    std::vector<std::future<void>> batch;
    for (std::size_t w = start; w < std::min(work.size(), start + jobs); ++w)
      batch.push_back(std::async(std::launch::async, run_one, work[w].first, work[w].second));
    for (auto& f : batch) f.get();
  }

  std::string csv = "config,schedule,sampling,seeds,samples_mean,samples_sd,wall_seconds_mean,wall_seconds_sd,score_mean,score_sd,"
                    "final_entropy_mean,final_entropy_sd\n";
  std::string runs_csv = "config,seed,cumulative_samples,score,final_entropy_nats,arch_hash\n";
  std::ostringstream txt;
  txt << std::left << std::setw(22) << "config" << std::setw(17) << "schedule" << std::setw(18) << "sampling" << std::setw(26)
      << "samples" << std::setw(22) << "wall s" << std::setw(22) << "score" << "final entropy" << "\n";
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<double> samples, wall, score, ent;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const auto& r = runs[c][i];
      samples.push_back(r.samples);
      wall.push_back(r.wall);
      score.push_back(r.score);
      ent.push_back(r.entropy);
      runs_csv += configs[c].name + ',' + std::to_string(seeds[i]) + ',' + std::to_string(std::uint64_t(r.samples)) + ',' +
                  format_double(r.score) + ',' + format_double(r.entropy) + ',' + r.hash + '\n';
    }
    const auto& sc = configs[c].rc.search;
    const auto S = summarize(samples), W = summarize(wall), Q = summarize(score), H = summarize(ent);
    csv += configs[c].name + ',' + std::string(schedule_name(sc.schedule)) + ',' + sampling_label(sc.sampling) + ',' +
           std::to_string(seeds.size()) + ',' + format_double(S.mean) + ',' + format_double(S.sd) + ',' + format_double(W.mean) +
           ',' + format_double(W.sd) + ',' + format_double(Q.mean) + ',' + format_double(Q.sd) + ',' + format_double(H.mean) +
           ',' + format_double(H.sd) + '\n';
    txt << std::left << std::setw(22) << configs[c].name << std::setw(17) << schedule_name(sc.schedule) << std::setw(18)
        << sampling_label(sc.sampling) << std::setw(26) << pm(S, 1) << std::setw(22) << pm(W, 3) << std::setw(22) << pm(Q, 4)
        << pm(H, 3) << "\n";
  }
  std::cout << txt.str();
  if (!out_dir.empty()) {
    prepare_out_dir(out_dir);
    Outputs out{out_dir};
    out.write("comparison.csv", csv);
    out.write("comparison.txt", txt.str());
    out.write("runs.csv", runs_csv);
    json cfgs = json::object();
    for (const auto& j : configs) cfgs[j.name] = snapshot(j.rc, *j.space);
    json manifest{{"format", "fpnas-manifest-compare"},
                  {"version", 1},
                  {"command", "compare"},
                  {"configs", cfgs},
                  {"seeds", seeds},
                  {"outputs", out.hashes},
                  {"timing", {{"finished_utc", utc_now()}}}};
    write_file_atomic(out_dir / "manifest.json", dump_json(manifest));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Architecture-distribution search over MBConv spaces"};
  app.require_subcommand(1);

  RunFlags search_flags, compare_flags;
  fs::path config_path, out_dir = "fpnas-out", resume_dir, arch_path, configs_dir, compare_out;
  std::string space_name, seeds = "1-5";
  std::optional<int> input_size;
  StepLimits search_limits, resume_limits;
  bool quiet = false, stats_json = false, flops_json = false;
  std::size_t jobs = 1;

  auto* search = app.add_subcommand("search", "Run a search from a config document");
  search->add_option("--config", config_path, "Run config (JSON) or a previous run's manifest")->required();
  search->add_option("--out", out_dir, "Output directory")->capture_default_str();
  search_flags.attach(search);
  search->add_option("--checkpoint-every", search_limits.checkpoint_every, "Write a checkpoint every N steps");
  search->add_option("--stop-after", search_limits.stop_after, "Stop after N steps (resume later)");
  search->add_flag("--quiet", quiet, "No summary on stdout");

  auto* resume = app.add_subcommand("resume", "Continue a stopped search from its checkpoint");
  resume->add_option("--out", resume_dir, "Output directory of the stopped run")->required();
  resume->add_option("--checkpoint-every", resume_limits.checkpoint_every, "Write a checkpoint every N steps");
  resume->add_option("--stop-after", resume_limits.stop_after, "Stop after N more steps");
  resume->add_flag("--quiet", quiet, "No summary on stdout");

  auto* stats = app.add_subcommand("space-stats", "Describe a search space");
  stats->add_option("space,--space", space_name, "Preset name or space document path")->required();
  stats->add_flag("--json", stats_json, "Machine-readable output");

  auto* flops = app.add_subcommand("flops", "Cost report for one architecture");
  flops->add_option("--space", space_name, "Preset name or space document path")->required();
  flops->add_option("--arch", arch_path, "Architecture document")->required();
  flops->add_option("--input-size", input_size, "Input resolution (default: the space's)");
  flops->add_flag("--json", flops_json, "Machine-readable output");

  auto* compare = app.add_subcommand("compare", "Run every config in a directory over several seeds");
  compare->add_option("--configs", configs_dir, "Directory of run configs")->required();
  compare->add_option("--seeds", seeds, "Seeds, e.g. 1-5 or 1,4,9")->capture_default_str();
  compare->add_option("--out", compare_out, "Write comparison.csv/.txt and runs.csv here");
  compare->add_option("--jobs", jobs, "Concurrent runs")->capture_default_str();
  compare_flags.attach(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*search) return cmd_search(config_path, search_flags, out_dir, search_limits, quiet);
    if (*resume) return cmd_resume(resume_dir, resume_limits, quiet);
    if (*stats) return cmd_space_stats(space_name, stats_json);
    if (*flops) return cmd_flops(space_name, arch_path, input_size, flops_json);
    if (*compare) return cmd_compare(configs_dir, seeds, compare_flags, compare_out, jobs);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
