#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "habgate/core.hpp"
#include "habgate/matrix.hpp"

namespace habgate::models {

/// Fully connected layer; weights are row-major (out x in).
struct DenseLayer {
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

struct MlpTraining {
  int epochs = 10;
  int batch_size = 5;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool class_weighting = true;
};

/// ReLU hidden layers, one sigmoid output unit giving P(Closed).
struct MlpModel {
  std::vector<DenseLayer> layers;

  [[nodiscard]] std::size_t n_inputs() const { return layers.empty() ? 0 : layers.front().n_in; }
  /// Pre-sigmoid output.
  [[nodiscard]] double logit(std::span<const double> row) const;
  [[nodiscard]] double probability(std::span<const double> row) const;
  /// Closed when probability >= 0.5.
  [[nodiscard]] Status predict(std::span<const double> row) const;
};

/// All weights and biases zero (output probability 0.5 everywhere).
MlpModel mlp_zero(std::size_t n_inputs, const std::vector<int>& hidden);
/// Glorot-uniform weights, zero biases.
MlpModel mlp_init(std::size_t n_inputs, const std::vector<int>& hidden, std::uint64_t seed);

struct MlpGradient {
  double loss = 0.0;
  std::vector<std::vector<double>> d_weights;  // per layer, same layout as weights
  std::vector<std::vector<double>> d_bias;
};

/**
 * @brief Weighted binary cross-entropy over the rows and its gradient.
 *
 * loss = (1/n) * sum_i w_i * BCE(sigmoid(z_i), y_i), computed from logits.
 */
MlpGradient mlp_loss_and_gradient(const MlpModel& model, const Dense& x, std::span<const double> y,
                                  std::span<const double> sample_weight);

/// Per-class weights n / (2 * n_class), indexed by Status.
std::array<double, 2> balanced_class_weights(std::span<const Status> y);

/// Adam mini-batch training with per-epoch shuffling. Throws NonFiniteLoss.
MlpModel mlp_fit(const Dense& x, std::span<const Status> y, const std::vector<int>& hidden,
                 const MlpTraining& training, std::uint64_t seed);

}  // namespace habgate::models
