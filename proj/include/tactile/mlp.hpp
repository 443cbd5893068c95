#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tactile/rng.hpp"

namespace tactile {

// Fully connected layer, weights stored row-major as out x in.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t o, std::size_t i) { return weights[o * in + i]; }
  double w(std::size_t o, std::size_t i) const { return weights[o * in + i]; }
};

// Rectifier hidden layers, softmax output.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<std::size_t> sizes);  // all parameters zero

  static Mlp he_init(std::vector<std::size_t> sizes, Rng& rng);

  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  std::size_t input_size() const noexcept { return sizes_.front(); }
  std::size_t output_size() const noexcept { return sizes_.back(); }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  std::vector<double> forward(std::span<const double> x) const;
  std::size_t predict(std::span<const double> x) const;

  // Flat view over every weight and bias, layer by layer (weights first).
  std::size_t parameter_count() const noexcept;
  double& parameter(std::size_t i);
  double parameter(std::size_t i) const;

  // Text format: "tactile-mlp 1", the layer sizes, then per layer one line
  // per output row of weights followed by one bias line.
  void save(std::ostream& out) const;
  static Mlp load(std::istream& in);

 private:
  std::vector<std::size_t> sizes_;
  std::vector<DenseLayer> layers_;
};

struct LabeledVector {
  std::vector<double> x;
  std::size_t label = 0;
};

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  static Gradients zeros_like(const Mlp& m);
  double flat(std::size_t i) const;
};

// Mean cross-entropy over the batch; fills grads with its gradient.
double loss_and_gradients(const Mlp& model, std::span<const LabeledVector> batch, Gradients& grads);
double mean_loss(const Mlp& model, std::span<const LabeledVector> data);

struct ClassMetrics {
  double accuracy = 0.0;
  double macro_recall = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

ClassMetrics evaluate(const Mlp& model, std::span<const LabeledVector> data);

struct TrainConfig {
  std::vector<std::size_t> layers{9, 32, 16, 8, 4};
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t epochs = 120;
  std::size_t batch = 32;
  std::uint64_t seed = 1;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double macro_recall = 0.0;
};

struct TrainResult {
  Mlp model;
  std::vector<EpochMetrics> curve;
};

// Mini-batch gradient descent with momentum on cross-entropy.
TrainResult mlp_train(std::span<const LabeledVector> data, const TrainConfig& cfg);

}  // namespace tactile
