#include "tactile/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "tactile/errors.hpp"

namespace tactile {

namespace {

struct ForwardCache {
  std::vector<std::vector<double>> pre;   // z per layer
  std::vector<std::vector<double>> post;  // post[0] = input, post[l+1] = activation of layer l
};

void softmax_inplace(std::vector<double>& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

ForwardCache run_forward(const Mlp& m, std::span<const double> x) {
  if (x.size() != m.input_size()) {
    throw ContractError("MLP input has " + std::to_string(x.size()) + " values, expected " +
                        std::to_string(m.input_size()));
  }
  ForwardCache c;
  c.post.emplace_back(x.begin(), x.end());
  const auto& layers = m.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    const auto& a = c.post.back();
    std::vector<double> z(L.bias);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double* row = &L.weights[o * L.in];
      z[o] += std::inner_product(row, row + L.in, a.begin(), 0.0);
    }
    c.pre.push_back(z);
    if (l + 1 == layers.size()) {
      softmax_inplace(z);
    } else {
      for (double& v : z) v = std::max(v, 0.0);
    }
    c.post.push_back(std::move(z));
  }
  return c;
}

void check_label(const Mlp& m, std::size_t label) {
  if (label >= m.output_size()) {
    throw DomainError("label " + std::to_string(label) + " out of range");
  }
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ConfigError("MLP needs at least an input and an output layer");
  for (auto s : sizes_) {
    if (s == 0) throw ConfigError("MLP layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    DenseLayer L;
    L.in = sizes_[l];
    L.out = sizes_[l + 1];
    L.weights.assign(L.in * L.out, 0.0);
    L.bias.assign(L.out, 0.0);
    layers_.push_back(std::move(L));
  }
}

Mlp Mlp::he_init(std::vector<std::size_t> sizes, Rng& rng) {
  Mlp m(std::move(sizes));
  for (auto& L : m.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(L.in));
    for (double& w : L.weights) w = rng.uniform(-limit, limit);
  }
  return m;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  return std::move(run_forward(*this, x).post.back());
}

std::size_t Mlp::predict(std::span<const double> x) const {
  auto p = forward(x);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& L : layers_) n += L.weights.size() + L.bias.size();
  return n;
}

double& Mlp::parameter(std::size_t i) {
  for (auto& L : layers_) {
    if (i < L.weights.size()) return L.weights[i];
    i -= L.weights.size();
    if (i < L.bias.size()) return L.bias[i];
    i -= L.bias.size();
  }
  throw ContractError("MLP parameter index out of range");
}

double Mlp::parameter(std::size_t i) const { return const_cast<Mlp&>(*this).parameter(i); }

void Mlp::save(std::ostream& out) const {
  out << "tactile-mlp 1\n";
  for (std::size_t i = 0; i < sizes_.size(); ++i) out << (i ? " " : "") << sizes_[i];
  out << '\n';
  out.precision(17);
  for (const auto& L : layers_) {
    for (std::size_t o = 0; o < L.out; ++o) {
      for (std::size_t i = 0; i < L.in; ++i) out << (i ? " " : "") << L.w(o, i);
      out << '\n';
    }
    for (std::size_t o = 0; o < L.out; ++o) out << (o ? " " : "") << L.bias[o];
    out << '\n';
  }
}

Mlp Mlp::load(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "tactile-mlp" || version != 1) {
    throw FormatError("not a tactile-mlp v1 model");
  }
  std::string line;
  std::getline(in, line);
  if (!std::getline(in, line)) throw FormatError("model is missing the layer sizes line");
  std::vector<std::size_t> sizes;
  {
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && line[pos] == ' ') ++pos;
      if (pos >= line.size()) break;
      std::size_t used = 0;
      sizes.push_back(static_cast<std::size_t>(std::stoul(line.substr(pos), &used)));
      pos += used;
    }
  }
  Mlp m(sizes);
  for (auto& L : m.layers_) {
    for (double& w : L.weights) {
      if (!(in >> w)) throw FormatError("model truncated in weights");
    }
    for (double& b : L.bias) {
      if (!(in >> b)) throw FormatError("model truncated in biases");
    }
  }
  return m;
}

Gradients Gradients::zeros_like(const Mlp& m) {
  Gradients g;
  for (const auto& L : m.layers()) {
    g.weights.emplace_back(L.weights.size(), 0.0);
    g.bias.emplace_back(L.bias.size(), 0.0);
  }
  return g;
}

double Gradients::flat(std::size_t i) const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (i < weights[l].size()) return weights[l][i];
    i -= weights[l].size();
    if (i < bias[l].size()) return bias[l][i];
    i -= bias[l].size();
  }
  throw ContractError("gradient index out of range");
}

double loss_and_gradients(const Mlp& model, std::span<const LabeledVector> batch, Gradients& grads) {
  if (batch.empty()) throw DomainError("empty batch");
  grads = Gradients::zeros_like(model);
  const auto& layers = model.layers();
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const auto& ex : batch) {
    check_label(model, ex.label);
    auto cache = run_forward(model, ex.x);
    const auto& p = cache.post.back();
    loss -= std::log(std::max(p[ex.label], 1e-300));

    std::vector<double> delta(p);
    delta[ex.label] -= 1.0;
    for (std::size_t l = layers.size(); l-- > 0;) {
      const auto& L = layers[l];
      const auto& a = cache.post[l];
      auto& gw = grads.weights[l];
      auto& gb = grads.bias[l];
      for (std::size_t o = 0; o < L.out; ++o) {
        gb[o] += scale * delta[o];
        double* row = &gw[o * L.in];
        for (std::size_t i = 0; i < L.in; ++i) row[i] += scale * delta[o] * a[i];
      }
      if (l == 0) break;
      std::vector<double> prev(L.in, 0.0);
      for (std::size_t o = 0; o < L.out; ++o) {
        const double* row = &L.weights[o * L.in];
        for (std::size_t i = 0; i < L.in; ++i) prev[i] += row[i] * delta[o];
      }
      const auto& z = cache.pre[l - 1];
      for (std::size_t i = 0; i < L.in; ++i) {
        if (z[i] <= 0.0) prev[i] = 0.0;
      }
      delta = std::move(prev);
    }
  }
  return loss * scale;
}

double mean_loss(const Mlp& model, std::span<const LabeledVector> data) {
  if (data.empty()) throw DomainError("empty dataset");
  double loss = 0.0;
  for (const auto& ex : data) {
    check_label(model, ex.label);
    auto p = model.forward(ex.x);
    loss -= std::log(std::max(p[ex.label], 1e-300));
  }
  return loss / static_cast<double>(data.size());
}

ClassMetrics evaluate(const Mlp& model, std::span<const LabeledVector> data) {
  if (data.empty()) throw DomainError("empty dataset");
  const std::size_t k = model.output_size();
  ClassMetrics m;
  m.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (const auto& ex : data) {
    check_label(model, ex.label);
    const auto pred = model.predict(ex.x);
    ++m.confusion[ex.label][pred];
    if (pred == ex.label) ++correct;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  double recall_sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const auto row = std::accumulate(m.confusion[c].begin(), m.confusion[c].end(), std::size_t{0});
    if (row == 0) continue;
    recall_sum += static_cast<double>(m.confusion[c][c]) / static_cast<double>(row);
    ++present;
  }
  m.macro_recall = present ? recall_sum / static_cast<double>(present) : 0.0;
  return m;
}

TrainResult mlp_train(std::span<const LabeledVector> data, const TrainConfig& cfg) {
  if (data.empty()) throw DomainError("cannot train on an empty dataset");
  if (cfg.batch == 0) throw ConfigError("batch size must be positive");
  Rng rng(cfg.seed);
  TrainResult result{Mlp::he_init(cfg.layers, rng), {}};
  Mlp& model = result.model;
  for (const auto& ex : data) check_label(model, ex.label);

  auto velocity = Gradients::zeros_like(model);
  Gradients grads;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<LabeledVector> batch;
  batch.reserve(cfg.batch);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      batch.clear();
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
      loss_and_gradients(model, batch, grads);
      auto& layers = model.layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t i = 0; i < layers[l].weights.size(); ++i) {
          auto& v = velocity.weights[l][i];
          v = cfg.momentum * v - cfg.learning_rate * grads.weights[l][i];
          layers[l].weights[i] += v;
        }
        for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
          auto& v = velocity.bias[l][i];
          v = cfg.momentum * v - cfg.learning_rate * grads.bias[l][i];
          layers[l].bias[i] += v;
        }
      }
    }
    const auto m = evaluate(model, data);
    result.curve.push_back({epoch, mean_loss(model, data), m.accuracy, m.macro_recall});
  }
  return result;
}

}  // namespace tactile
