#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fpnas/eval.hpp"
#include "fpnas/random.hpp"
#include "fpnas/space.hpp"

namespace fpnas {

// Seeded Gaussian-mixture classification data split into disjoint train and
// validation halves.
struct Dataset {
  std::size_t dim = 0;
  std::size_t classes = 0;
  std::vector<float> x;  // row-major, size() * dim
  std::vector<std::uint32_t> y;

  std::size_t size() const { return y.size(); }
  std::span<const float> row(std::size_t i) const { return {x.data() + i * dim, dim}; }

  // Rows [begin, begin + n) with wrap-around.
  Dataset slice(std::size_t begin, std::size_t n) const {
    Dataset d{dim, classes, {}, {}};
    d.x.reserve(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = (begin + i) % size();
      auto src = row(r);
      d.x.insert(d.x.end(), src.begin(), src.end());
      d.y.push_back(y[r]);
    }
    return d;
  }
};

struct MixtureConfig {
  std::size_t dim = 16;
  std::size_t classes = 8;
  std::size_t train_size = 2000;
  std::size_t val_size = 2000;
  double separation = 1.5;
  std::uint64_t seed = 0;
};

struct DataSplit {
  Dataset train;
  Dataset val;
};

inline DataSplit make_gaussian_mixture(const MixtureConfig& c) {
  Rng rng(c.seed);
  std::vector<double> means(c.classes * c.dim);
  for (auto& m : means) m = c.separation * rng.normal();
  auto draw = [&](std::size_t n) {
    Dataset d{c.dim, c.classes, {}, {}};
    d.x.reserve(n * c.dim);
    for (std::size_t i = 0; i < n; ++i) {
      const auto label = static_cast<std::uint32_t>(rng.below(c.classes));
      d.y.push_back(label);
      for (std::size_t j = 0; j < c.dim; ++j) d.x.push_back(static_cast<float>(means[label * c.dim + j] + rng.normal()));
    }
    return d;
  };
  DataSplit s;
  s.train = draw(c.train_size);
  s.val = draw(c.val_size);
  return s;
}

// Dense weight-sharing supernet. Each searchable position is one dense layer;
// its width comes from the `channel` variable, its activation from
// `nonlinearity`, kernel 0 bypasses it, and every (width, splits) choice owns a
// separate weight bank. Banks are sized for the widest possible input and an
// architecture uses the leading columns that match its actual input width.
template <typename T>
class ToySupernet {
 public:
  struct Bank {
    std::size_t offset = 0;  // into parameters()
    std::size_t rows = 0;    // output width
    std::size_t cols = 0;    // max input width
    std::size_t size() const { return rows * cols + rows; }
  };

  ToySupernet(const SearchSpace& space, std::size_t input_dim, std::size_t classes, std::uint64_t seed)
      : input_dim_(input_dim), classes_(classes) {
    std::size_t max_in = input_dim;
    for (const auto& p : space.positions()) {
      const auto& g = space.groups()[p.group];
      for (const auto& v : g.var(Variable::channel).values) max_in = std::max(max_in, static_cast<std::size_t>(as_number(v)));
    }
    max_width_ = max_in;
    std::size_t offset = 0;
    positions_.resize(space.num_positions());
    for (std::size_t l = 0; l < space.num_positions(); ++l) {
      const auto& p = space.position(l);
      auto& info = positions_[l];
      info.width_slot = p.slot_of(Variable::channel);
      info.act_slot = p.slot_of(Variable::nonlinearity);
      info.kernel_slot = p.slot_of(Variable::kernel);
      info.splits_slot = p.slot_of(Variable::splits);
      const auto& g = space.groups()[p.group];
      for (const auto& v : info.width_slot ? p.variables[*info.width_slot].values : g.var(Variable::channel).values)
        info.widths.push_back(static_cast<std::size_t>(as_number(v)));
      for (const auto& v : info.act_slot ? p.variables[*info.act_slot].values : g.var(Variable::nonlinearity).values)
        info.swish.push_back(std::get<std::string>(v) == "swish");
      for (const auto& v : info.kernel_slot ? p.variables[*info.kernel_slot].values : g.var(Variable::kernel).values)
        info.skip.push_back(as_number(v) == 0.0);
      info.split_choices = info.splits_slot ? p.variables[*info.splits_slot].size() : 1;
      for (std::size_t w = 0; w < info.widths.size(); ++w)
        for (std::size_t s = 0; s < info.split_choices; ++s) {
          Bank b{offset, info.widths[w], max_in};
          offset += b.size();
          info.banks.push_back(b);
        }
    }
    head_ = Bank{offset, classes, max_in};
    offset += head_.size();
    params_.assign(offset, T(0));

    Rng rng(seed);
    auto init = [&](const Bank& b) {
      const double scale = std::sqrt(2.0 / static_cast<double>(b.cols));
      for (std::size_t i = 0; i < b.rows * b.cols; ++i) params_[b.offset + i] = static_cast<T>(scale * rng.normal());
    };
    for (const auto& info : positions_)
      for (const auto& b : info.banks) init(b);
    init(head_);
  }

  std::size_t parameter_count() const { return params_.size(); }
  std::span<T> parameters() { return params_; }
  std::span<const T> parameters() const { return params_; }
  std::size_t num_classes() const { return classes_; }

  std::size_t bank_count() const {
    std::size_t n = 1;
    for (const auto& info : positions_) n += info.banks.size();
    return n;
  }
  // Sum of bank sizes; equals parameter_count().
  std::size_t bank_parameter_total() const {
    std::size_t n = head_.size();
    for (const auto& info : positions_)
      for (const auto& b : info.banks) n += b.size();
    return n;
  }

  // Banks an architecture reads, including the head.
  std::vector<Bank> banks_used(const Architecture& a) const {
    std::vector<Bank> out;
    for (std::size_t l = 0; l < positions_.size(); ++l) {
      const auto layer = resolve(l, a);
      if (!layer.skip) out.push_back(*layer.bank);
    }
    out.push_back(head_);
    return out;
  }

  // Mean per-example log-likelihood of the labels.
  double log_likelihood(const Architecture& a, const Dataset& data) const {
    double total = 0.0;
    Workspace ws;
    for (std::size_t i = 0; i < data.size(); ++i) total += forward(a, data.row(i), data.y[i], ws);
    return total / static_cast<double>(data.size());
  }

  double accuracy(const Architecture& a, const Dataset& data) const {
    std::size_t hit = 0;
    Workspace ws;
    for (std::size_t i = 0; i < data.size(); ++i) {
      forward(a, data.row(i), data.y[i], ws);
      const auto& logits = ws.logits;
      if (static_cast<std::uint32_t>(std::max_element(logits.begin(), logits.end()) - logits.begin()) == data.y[i]) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(data.size());
  }

  // Gradient of the mean negative log-likelihood over `data` w.r.t. all
  // parameters (zero outside the banks the architecture touches).
  std::vector<T> gradient(const Architecture& a, const Dataset& data, double* mean_loglik = nullptr) const {
    std::vector<T> grad(params_.size(), T(0));
    Workspace ws;
    double total = 0.0;
    const T inv_n = T(1) / static_cast<T>(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      total += forward(a, data.row(i), data.y[i], ws);
      backward(a, data.y[i], inv_n, ws, grad);
    }
    if (mean_loglik) *mean_loglik = total / static_cast<double>(data.size());
    return grad;
  }

  // Averages the K architectures' gradients and takes one SGD step. Banks no
  // architecture touches are left bit-identical.
  double train_step(std::span<const Architecture> archs, const Dataset& batch, double lr) {
    if (archs.empty()) return 0.0;
    std::vector<T> grad(params_.size(), T(0));
    std::vector<char> touched(params_.size(), 0);
    double total = 0.0;
    for (const auto& a : archs) {
      double ll = 0.0;
      const auto g = gradient(a, batch, &ll);
      total += ll;
      for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
      for (const auto& b : banks_used(a)) std::fill_n(touched.begin() + static_cast<std::ptrdiff_t>(b.offset), b.size(), 1);
    }
    const T scale = static_cast<T>(lr) / static_cast<T>(archs.size());
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (touched[i]) params_[i] -= scale * grad[i];
    return total / static_cast<double>(archs.size());
  }

  template <typename U>
  ToySupernet<U> cast() const {
    ToySupernet<U> out(*this);
    return out;
  }

 private:
  template <typename>
  friend class ToySupernet;

  template <typename U>
  explicit ToySupernet(const ToySupernet<U>& other)
      : input_dim_(other.input_dim_),
        classes_(other.classes_),
        max_width_(other.max_width_),
        head_{other.head_.offset, other.head_.rows, other.head_.cols} {
    for (const auto& p : other.positions_) {
      PositionInfo info;
      info.width_slot = p.width_slot;
      info.act_slot = p.act_slot;
      info.kernel_slot = p.kernel_slot;
      info.splits_slot = p.splits_slot;
      info.widths = p.widths;
      info.swish = p.swish;
      info.skip = p.skip;
      info.split_choices = p.split_choices;
      for (const auto& b : p.banks) info.banks.push_back(Bank{b.offset, b.rows, b.cols});
      positions_.push_back(std::move(info));
    }
    params_.assign(other.params_.begin(), other.params_.end());
  }

  struct PositionInfo {
    std::optional<std::size_t> width_slot, act_slot, kernel_slot, splits_slot;
    std::vector<std::size_t> widths;
    std::vector<bool> swish;
    std::vector<bool> skip;
    std::size_t split_choices = 1;
    std::vector<Bank> banks;  // width-major, then splits
  };

  struct Layer {
    bool skip = false;
    bool swish = false;
    const Bank* bank = nullptr;
  };

  Layer resolve(std::size_t l, const Architecture& a) const {
    const auto& info = positions_[l];
    const auto& t = a.choices.at(l);
    auto pick = [&](const std::optional<std::size_t>& slot) -> std::size_t { return slot ? t.at(*slot) : 0; };
    Layer layer;
    layer.skip = info.skip[pick(info.kernel_slot)];
    layer.swish = info.swish[pick(info.act_slot)];
    layer.bank = &info.banks[pick(info.width_slot) * info.split_choices + pick(info.splits_slot)];
    return layer;
  }

  struct Workspace {
    std::vector<std::vector<T>> inputs;  // input activation of each non-skip layer
    std::vector<std::vector<T>> pre;     // pre-activation of each non-skip layer
    std::vector<Layer> layers;
    std::vector<T> last;                 // input to the head
    std::vector<T> logits;
    std::vector<T> probs;
  };

  static T act(T z, bool swish) {
    if (swish) return z / (T(1) + std::exp(-z));
    return z > T(0) ? z : T(0);
  }
  static T act_grad(T z, bool swish) {
    if (swish) {
      const T s = T(1) / (T(1) + std::exp(-z));
      return s * (T(1) + z * (T(1) - s));
    }
    return z > T(0) ? T(1) : T(0);
  }

  void dense(const Bank& b, std::span<const T> in, std::vector<T>& out) const {
    out.assign(b.rows, T(0));
    const T* w = params_.data() + b.offset;
    const T* bias = w + b.rows * b.cols;
    for (std::size_t r = 0; r < b.rows; ++r) {
      T s = bias[r];
      const T* wr = w + r * b.cols;
      for (std::size_t c = 0; c < in.size(); ++c) s += wr[c] * in[c];
      out[r] = s;
    }
  }

  double forward(const Architecture& a, std::span<const float> x, std::uint32_t label, Workspace& ws) const {
    ws.inputs.clear();
    ws.pre.clear();
    ws.layers.clear();
    std::vector<T> h(x.begin(), x.end());
    for (std::size_t l = 0; l < positions_.size(); ++l) {
      const auto layer = resolve(l, a);
      if (layer.skip) continue;
      std::vector<T> z;
      dense(*layer.bank, h, z);
      ws.inputs.push_back(h);
      std::vector<T> next(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) next[i] = act(z[i], layer.swish);
      ws.pre.push_back(std::move(z));
      ws.layers.push_back(layer);
      h = std::move(next);
    }
    ws.last = h;
    dense(head_, h, ws.logits);
    const T mx = *std::max_element(ws.logits.begin(), ws.logits.end());
    T sum = T(0);
    ws.probs.resize(ws.logits.size());
    for (std::size_t i = 0; i < ws.logits.size(); ++i) sum += (ws.probs[i] = std::exp(ws.logits[i] - mx));
    for (auto& p : ws.probs) p /= sum;
    return static_cast<double>(ws.logits[label] - mx - std::log(sum));
  }

  // Accumulates scale * d(-loglik)/d(params) into grad.
  void backward(const Architecture&, std::uint32_t label, T scale, const Workspace& ws, std::vector<T>& grad) const {
    std::vector<T> dlogits(ws.probs);
    dlogits[label] -= T(1);
    std::vector<T> dh = dense_backward(head_, ws.last, dlogits, scale, grad);
    for (std::size_t k = ws.layers.size(); k-- > 0;) {
      const auto& z = ws.pre[k];
      std::vector<T> dz(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) dz[i] = dh[i] * act_grad(z[i], ws.layers[k].swish);
      dh = dense_backward(*ws.layers[k].bank, ws.inputs[k], dz, scale, grad);
    }
  }

  std::vector<T> dense_backward(const Bank& b, const std::vector<T>& in, const std::vector<T>& dout, T scale,
                                std::vector<T>& grad) const {
    const T* w = params_.data() + b.offset;
    T* gw = grad.data() + b.offset;
    T* gb = gw + b.rows * b.cols;
    std::vector<T> din(in.size(), T(0));
    for (std::size_t r = 0; r < b.rows; ++r) {
      const T d = dout[r];
      gb[r] += scale * d;
      const T* wr = w + r * b.cols;
      T* gwr = gw + r * b.cols;
      for (std::size_t c = 0; c < in.size(); ++c) {
        gwr[c] += scale * d * in[c];
        din[c] += d * wr[c];
      }
    }
    return din;
  }

  std::size_t input_dim_ = 0;
  std::size_t classes_ = 0;
  std::size_t max_width_ = 0;
  std::vector<PositionInfo> positions_;
  Bank head_;
  std::vector<T> params_;
};

struct SupernetConfig {
  MixtureConfig data;
  std::size_t batch_size = 64;
  double lr = 0.8;  // cosine-decayed over the run
  std::uint64_t seed = 0;
};

// Evaluator adaptor: owns the data split and a single-precision supernet.
class SupernetEvaluator : public Evaluator {
 public:
  SupernetEvaluator(const SearchSpace& space, SupernetConfig config)
      : config_(config),
        data_(make_gaussian_mixture(config.data)),
        net_(space, config.data.dim, config.data.classes, derive_seed(config.seed, 1)) {
    if (config_.batch_size == 0) throw ValidationError("supernet batch_size must be >= 1");
  }

  std::string kind() const override { return "supernet"; }

  void begin(std::uint64_t total_steps) override { total_steps_ = std::max<std::uint64_t>(1, total_steps); }

  double learning_rate(std::uint64_t step) const {
    const double progress = std::min(1.0, static_cast<double>(step) / static_cast<double>(total_steps_));
    return 0.5 * config_.lr * (1.0 + std::cos(std::numbers::pi * progress));
  }

  double train_step(std::span<const Architecture> archs, std::uint64_t step) override {
    const auto batch = data_.train.slice(step * config_.batch_size, config_.batch_size);
    return net_.train_step(archs, batch, learning_rate(step));
  }

  std::vector<double> validate(std::span<const Architecture> archs, std::uint64_t step) const override {
    const auto batch = data_.val.slice(step * config_.batch_size, config_.batch_size);
    std::vector<double> out;
    for (const auto& a : archs) out.push_back(net_.log_likelihood(a, batch));
    return out;
  }

  // Validation accuracy on the full held-out half.
  double score(const Architecture& a) const override { return net_.accuracy(a, data_.val); }

  json state() const override {
    json j;
    j["parameters"] = std::vector<float>(net_.parameters().begin(), net_.parameters().end());
    return j;
  }
  void load_state(const json& j) override {
    const auto p = j.at("parameters").get<std::vector<float>>();
    if (p.size() != net_.parameter_count()) throw ParseError("evaluator.parameters", "size mismatch");
    std::copy(p.begin(), p.end(), net_.parameters().begin());
  }

  const ToySupernet<float>& net() const { return net_; }
  const DataSplit& data() const { return data_; }

 private:
  SupernetConfig config_;
  DataSplit data_;
  ToySupernet<float> net_;
  std::uint64_t total_steps_ = 1;
};

}  // namespace fpnas
