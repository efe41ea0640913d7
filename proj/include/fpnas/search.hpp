#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fpnas/cost.hpp"
#include "fpnas/dist.hpp"
#include "fpnas/eval.hpp"
#include "fpnas/sampler.hpp"
#include "fpnas/space.hpp"
#include "fpnas/update.hpp"

namespace fpnas {

enum class Schedule : std::uint8_t { joint_only, factorized_only, mixed };

inline std::string_view schedule_name(Schedule s) {
  switch (s) {
    case Schedule::joint_only: return "joint_only";
    case Schedule::factorized_only: return "factorized_only";
    case Schedule::mixed: return "mixed";
  }
  return "?";
}

struct SearchConfig {
  std::size_t epochs = 315;
  std::size_t warmup_epochs = 45;
  std::size_t steps_per_epoch = 16;
  Schedule schedule = Schedule::mixed;
  std::optional<std::size_t> theta;  // conversion epoch for the mixed schedule
  SamplingPolicy sampling;
  double beta = 0.3;
  std::optional<double> target_flops;  // no cost term when unset
  AdamConfig adam;
  std::uint64_t seed = 0;
  std::size_t joint_cap = kDefaultJointCap;
  CostModel cost_model;

  std::size_t theta_epoch() const { return theta.value_or(epochs / 4); }
  std::uint64_t total_steps() const { return static_cast<std::uint64_t>(epochs) * steps_per_epoch; }

  void validate() const {
    if (epochs == 0) throw ValidationError("epochs must be >= 1");
    if (steps_per_epoch == 0) throw ValidationError("steps_per_epoch must be >= 1");
    if (warmup_epochs > epochs) throw ValidationError("warmup_epochs must not exceed epochs");
    if (schedule == Schedule::mixed) {
      const auto t = theta_epoch();
      if (t <= warmup_epochs || t > epochs)
        throw ValidationError("theta must lie in (warmup_epochs, epochs], got " + std::to_string(t));
    }
    if (!(beta >= 0.0)) throw ValidationError("beta must be >= 0");
    if (target_flops && !(*target_flops > 0.0)) throw ValidationError("target_flops must be positive");
    if (!(adam.lr > 0.0)) throw ValidationError("alpha learning rate must be positive");
    sampling.validate();
  }
};

struct StepRecord {
  std::size_t epoch = 0;
  std::uint64_t step = 0;  // global step index
  bool warmup = false;
  DistMode mode = DistMode::joint;
  double entropy_nats = 0.0;
  std::size_t k = 0;
  std::uint64_t cumulative_samples = 0;
  double expected_cost = 0.0;
  double mean_val_loglik = std::numeric_limits<double>::quiet_NaN();
  double mean_train_loglik = std::numeric_limits<double>::quiet_NaN();
  double sum_m = std::numeric_limits<double>::quiet_NaN();
  double min_m = std::numeric_limits<double>::quiet_NaN();
  double max_m = std::numeric_limits<double>::quiet_NaN();
  double loss = std::numeric_limits<double>::quiet_NaN();  // -loglik + beta * log C, monitoring only
  std::string mpa_hash;
  double wall_seconds = 0.0;
};

struct TraceEvent {
  std::uint64_t step = 0;
  std::string what;
};

struct SearchTrace {
  std::vector<StepRecord> steps;
  std::vector<TraceEvent> events;

  std::uint64_t cumulative_samples() const { return steps.empty() ? 0 : steps.back().cumulative_samples; }
  double wall_seconds() const {
    double s = 0.0;
    for (const auto& r : steps) s += r.wall_seconds;
    return s;
  }
};

struct SearchResult {
  Architecture architecture;
  SearchTrace trace;
  ArchDistribution distribution;
  OptimizerState optimizer;
  CostReport cost;
  double score = 0.0;
};

// Step-driven search. run() executes every remaining step; step() executes
// one, so callers can checkpoint between steps.
class Search {
 public:
  Search(SearchConfig config, const SearchSpace& space, Evaluator& evaluator)
      : config_(std::move(config)), space_(space), evaluator_(evaluator), rng_(config_.seed) {
    config_.validate();
    const DistMode initial = config_.schedule == Schedule::joint_only ? DistMode::joint : DistMode::factorized;
    if (initial == DistMode::joint) {
      for (std::size_t l = 0; l < space_.num_positions(); ++l)
        if (space_.position(l).joint_cardinality() > config_.joint_cap)
          throw RuntimeError("joint block at position " + std::to_string(l) + " exceeds the cardinality cap");
    }
    dist_ = ArchDistribution::uniform(space_, initial);
    optimizer_ = OptimizerState::for_distribution(dist_, config_.adam);
    evaluator_.begin(config_.total_steps());
  }

  bool done() const { return step_ >= config_.total_steps(); }
  std::uint64_t current_step() const { return step_; }
  std::size_t current_epoch() const { return static_cast<std::size_t>(step_ / config_.steps_per_epoch); }
  bool converted() const { return converted_; }

  const SearchConfig& config() const { return config_; }
  const ArchDistribution& distribution() const { return dist_; }
  const OptimizerState& optimizer() const { return optimizer_; }
  const SearchTrace& trace() const { return trace_; }
  const Rng& rng() const { return rng_; }
  std::uint64_t cumulative_samples() const { return cumulative_; }

  // Applies the coarse-to-fine conversion if the mixed schedule has reached
  // theta. Returns true when it converted. Optimizer moments restart because
  // the parameter shapes change.
  bool maybe_convert() {
    if (config_.schedule != Schedule::mixed || converted_ || current_epoch() < config_.theta_epoch() || done()) return false;
    dist_ = factorized_to_joint(dist_, config_.joint_cap);
    optimizer_ = OptimizerState::for_distribution(dist_, config_.adam);
    converted_ = true;
    trace_.events.push_back({step_, "converted factorized -> joint at epoch " + std::to_string(current_epoch()) +
                                        "; optimizer state restarted"});
    return true;
  }

  void step() {
    if (done()) return;
    const auto t0 = std::chrono::steady_clock::now();
    maybe_convert();

    StepRecord rec;
    rec.epoch = current_epoch();
    rec.step = step_;
    rec.warmup = rec.epoch < config_.warmup_epochs;
    rec.mode = dist_.mode();
    rec.entropy_nats = entropy(dist_);

    auto batch = draw_batch(dist_, config_.sampling, rng_, &cumulative_);
    rec.k = batch.size();
    rec.cumulative_samples = cumulative_;

    batch.flops.resize(batch.size(), 0.0);
    batch.hinge_costs.resize(batch.size(), 0.0);
    if (config_.target_flops) {
      for (std::size_t k = 0; k < batch.size(); ++k) {
        batch.flops[k] = static_cast<double>(arch_flops(space_, batch.architectures[k], config_.cost_model).total_flops);
        batch.hinge_costs[k] = hinge_cost(batch.flops[k], *config_.target_flops);
      }
    }
    rec.expected_cost = expected_cost(batch.hinge_costs);

    try {
      rec.mean_train_loglik = evaluator_.train_step(batch.architectures, step_);
      if (!rec.warmup) {
        batch.val_log_likelihoods = evaluator_.validate(batch.architectures, step_);
        const auto w = importance_weights(batch.val_log_likelihoods, batch.hinge_costs, config_.beta);
        adam_step(optimizer_, dist_, alpha_gradient(dist_, batch, w));
        double mean_ll = 0.0;
        for (double v : batch.val_log_likelihoods) mean_ll += v;
        rec.mean_val_loglik = mean_ll / static_cast<double>(batch.size());
        rec.sum_m = w.sum();
        rec.min_m = w.min();
        rec.max_m = w.max();
        rec.loss = cost_aware_loss(rec.mean_val_loglik, rec.expected_cost, config_.beta);
      }
    } catch (const std::exception& e) {
      throw RuntimeError("step " + std::to_string(step_) + " (epoch " + std::to_string(rec.epoch) + "): " + e.what());
    }

    rec.mpa_hash = arch_hash(most_probable_architecture(dist_));
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    trace_.steps.push_back(std::move(rec));
    ++step_;
  }

  SearchResult run() {
    while (!done()) step();
    return result();
  }

  SearchResult result() const {
    SearchResult r;
    r.architecture = most_probable_architecture(space_, dist_);
    r.trace = trace_;
    r.distribution = dist_;
    r.optimizer = optimizer_;
    r.cost = arch_flops(space_, r.architecture, config_.cost_model);
    r.score = evaluator_.score(r.architecture);
    return r;
  }

  // Checkpointed state; restore() resumes bit-exactly.
  struct State {
    ArchDistribution distribution;
    OptimizerState optimizer;
    std::string rng_state;
    std::uint64_t step = 0;
    std::uint64_t cumulative_samples = 0;
    bool converted = false;
    SearchTrace trace;
  };

  State state() const { return State{dist_, optimizer_, rng_.state(), step_, cumulative_, converted_, trace_}; }

  void restore(const State& s) {
    if (s.distribution.shape() != space_.shape()) throw ValidationError("checkpoint does not match the search space");
    dist_ = s.distribution;
    optimizer_ = s.optimizer;
    rng_.set_state(s.rng_state);
    step_ = s.step;
    cumulative_ = s.cumulative_samples;
    converted_ = s.converted;
    trace_ = s.trace;
  }

 private:
  SearchConfig config_;
  const SearchSpace& space_;
  Evaluator& evaluator_;
  Rng rng_;
  ArchDistribution dist_;
  OptimizerState optimizer_;
  SearchTrace trace_;
  std::uint64_t step_ = 0;
  std::uint64_t cumulative_ = 0;
  bool converted_ = false;
};

inline SearchResult run_search(const SearchConfig& config, const SearchSpace& space, Evaluator& evaluator) {
  Search s(config, space, evaluator);
  return s.run();
}

// ---------------------------------------------------------------------------

struct NamedConfig {
  std::string name;
  SearchConfig config;
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (0 for a single run)
};

inline Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double v = 0.0;
    for (double x : xs) v += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(v / static_cast<double>(xs.size() - 1));
  }
  return s;
}

struct ComparisonRow {
  std::string name;
  std::vector<double> samples, wall_seconds, score, final_entropy;  // one entry per seed
  Summary samples_summary() const { return summarize(samples); }
  Summary wall_summary() const { return summarize(wall_seconds); }
  Summary score_summary() const { return summarize(score); }
  Summary entropy_summary() const { return summarize(final_entropy); }
};

using EvaluatorFactory = std::function<std::unique_ptr<Evaluator>(std::uint64_t seed)>;

// Runs every config on every seed; the seed drives both the search stream and
// the evaluator, so configs are compared on identical problems.
inline std::vector<ComparisonRow> compare_schedules(const std::vector<NamedConfig>& configs, const SearchSpace& space,
                                                    const EvaluatorFactory& make_evaluator,
                                                    const std::vector<std::uint64_t>& seeds) {
  std::vector<ComparisonRow> rows;
  for (const auto& nc : configs) {
    ComparisonRow row;
    row.name = nc.name;
    for (auto seed : seeds) {
      auto cfg = nc.config;
      cfg.seed = seed;
      auto evaluator = make_evaluator(seed);
      const auto r = run_search(cfg, space, *evaluator);
      row.samples.push_back(static_cast<double>(r.trace.cumulative_samples()));
      row.wall_seconds.push_back(r.trace.wall_seconds());
      row.score.push_back(r.score);
      row.final_entropy.push_back(entropy(r.distribution));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fpnas
