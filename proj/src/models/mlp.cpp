#include "habgate/models/mlp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace habgate::models {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// BCE(sigmoid(z), y) in a form that never overflows.
double bce_from_logit(double z, double y) { return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z))); }

std::vector<DenseLayer> make_layers(std::size_t n_inputs, const std::vector<int>& hidden) {
  std::vector<DenseLayer> layers;
  std::size_t in = n_inputs;
  for (int h : hidden) {
    if (h < 1) throw Error(ErrorKind::InvalidArgument, "hidden layer width must be positive");
    auto out = static_cast<std::size_t>(h);
    layers.push_back({in, out, std::vector<double>(in * out, 0.0), std::vector<double>(out, 0.0)});
    in = out;
  }
  layers.push_back({in, 1, std::vector<double>(in, 0.0), std::vector<double>(1, 0.0)});
  return layers;
}

/// Forward pass keeping every layer's post-activation output.
void forward(const MlpModel& m, std::span<const double> row, std::vector<std::vector<double>>& acts) {
  acts.resize(m.layers.size() + 1);
  acts[0].assign(row.begin(), row.end());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto& L = m.layers[l];
    auto& out = acts[l + 1];
    out.assign(L.n_out, 0.0);
    const auto& in = acts[l];
    const bool hidden = l + 1 < m.layers.size();
    for (std::size_t o = 0; o < L.n_out; ++o) {
      double z = L.bias[o];
      const double* w = L.weights.data() + o * L.n_in;
      for (std::size_t i = 0; i < L.n_in; ++i) z += w[i] * in[i];
      out[o] = hidden ? std::max(z, 0.0) : z;  // output kept as a logit
    }
  }
}

/// Accumulates scale * dLoss/dParams for one row into grad; returns the row loss.
double backward_row(const MlpModel& m, std::span<const double> row, double y, double scale,
                    std::vector<std::vector<double>>& acts, std::vector<std::vector<double>>& deltas,
                    MlpGradient& grad) {
  forward(m, row, acts);
  const double z = acts.back()[0];
  const double loss = bce_from_logit(z, y);
  deltas.resize(m.layers.size());
  deltas.back().assign(1, (sigmoid(z) - y) * scale);
  for (std::size_t l = m.layers.size(); l-- > 0;) {
    const auto& L = m.layers[l];
    const auto& in = acts[l];
    const auto& delta = deltas[l];
    auto& dw = grad.d_weights[l];
    auto& db = grad.d_bias[l];
    for (std::size_t o = 0; o < L.n_out; ++o) {
      if (delta[o] == 0.0) continue;
      db[o] += delta[o];
      double* g = dw.data() + o * L.n_in;
      for (std::size_t i = 0; i < L.n_in; ++i) g[i] += delta[o] * in[i];
    }
    if (l == 0) break;
    auto& prev = deltas[l - 1];
    prev.assign(L.n_in, 0.0);
    for (std::size_t o = 0; o < L.n_out; ++o) {
      if (delta[o] == 0.0) continue;
      const double* w = L.weights.data() + o * L.n_in;
      for (std::size_t i = 0; i < L.n_in; ++i) prev[i] += delta[o] * w[i];
    }
    // ReLU derivative (0 at the kink).
    for (std::size_t i = 0; i < L.n_in; ++i) {
      if (in[i] <= 0.0) prev[i] = 0.0;
    }
  }
  return loss;
}

MlpGradient zero_gradient(const MlpModel& m) {
  MlpGradient g;
  for (const auto& L : m.layers) {
    g.d_weights.emplace_back(L.weights.size(), 0.0);
    g.d_bias.emplace_back(L.bias.size(), 0.0);
  }
  return g;
}

}  // namespace

double MlpModel::logit(std::span<const double> row) const {
  if (row.size() != n_inputs()) throw Error(ErrorKind::FeatureMismatch, "query arity differs from network input");
  std::vector<std::vector<double>> acts;
  forward(*this, row, acts);
  return acts.back()[0];
}

double MlpModel::probability(std::span<const double> row) const { return sigmoid(logit(row)); }

Status MlpModel::predict(std::span<const double> row) const {
  return probability(row) >= 0.5 ? Status::Closed : Status::Open;
}

MlpModel mlp_zero(std::size_t n_inputs, const std::vector<int>& hidden) {
  return MlpModel{make_layers(n_inputs, hidden)};
}

MlpModel mlp_init(std::size_t n_inputs, const std::vector<int>& hidden, std::uint64_t seed) {
  MlpModel m{make_layers(n_inputs, hidden)};
  Rng rng(seed);
  for (auto& L : m.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(L.n_in + L.n_out));
    for (auto& w : L.weights) w = rng.uniform(-limit, limit);
  }
  return m;
}

MlpGradient mlp_loss_and_gradient(const MlpModel& model, const Dense& x, std::span<const double> y,
                                  std::span<const double> sample_weight) {
  if (x.n_rows == 0) throw Error(ErrorKind::EmptyMatrix, "no rows");
  MlpGradient g = zero_gradient(model);
  std::vector<std::vector<double>> acts, deltas;
  const double inv_n = 1.0 / static_cast<double>(x.n_rows);
  for (std::size_t r = 0; r < x.n_rows; ++r) {
    const double w = sample_weight.empty() ? 1.0 : sample_weight[r];
    g.loss += inv_n * w * backward_row(model, x.row(r), y[r], inv_n * w, acts, deltas, g);
  }
  return g;
}

std::array<double, 2> balanced_class_weights(std::span<const Status> y) {
  std::array<std::size_t, 2> n{};
  for (auto s : y) ++n[s == Status::Closed];
  std::array<double, 2> w{1.0, 1.0};
  for (int c = 0; c < 2; ++c) {
    if (n[c]) w[c] = static_cast<double>(y.size()) / (2.0 * static_cast<double>(n[c]));
  }
  return w;
}

MlpModel mlp_fit(const Dense& x, std::span<const Status> y, const std::vector<int>& hidden,
                 const MlpTraining& training, std::uint64_t seed) {
  if (x.n_rows == 0) throw Error(ErrorKind::TrainTooSmall, "MLP needs at least one training row");
  if (y.size() != x.n_rows) throw Error(ErrorKind::InvalidArgument, "label count does not match rows");
  if (training.batch_size < 1 || training.epochs < 0) throw Error(ErrorKind::InvalidArgument, "bad MLP schedule");

  Rng rng(seed);
  MlpModel model = mlp_init(x.n_cols, hidden, rng.next_u64());
  const auto cw = training.class_weighting ? balanced_class_weights(y) : std::array<double, 2>{1.0, 1.0};

  MlpGradient m = zero_gradient(model), v = zero_gradient(model);
  std::vector<std::size_t> order(x.n_rows);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<double>> acts, deltas;
  long step = 0;
  const auto batch = static_cast<std::size_t>(training.batch_size);

  for (int epoch = 0; epoch < training.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      MlpGradient g = zero_gradient(model);
      double loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t r = order[i];
        const double yr = encode(y[r]);
        const double w = cw[y[r] == Status::Closed];
        loss += inv_b * w * backward_row(model, x.row(r), yr, inv_b * w, acts, deltas, g);
      }
      if (!std::isfinite(loss)) {
        throw Error(ErrorKind::NonFiniteLoss, "loss became non-finite in epoch " + std::to_string(epoch + 1));
      }
      ++step;
      const double c1 = 1.0 - std::pow(training.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(training.beta2, static_cast<double>(step));
      auto update = [&](std::vector<double>& param, const std::vector<double>& grad, std::vector<double>& mm,
                        std::vector<double>& vv) {
        for (std::size_t k = 0; k < param.size(); ++k) {
          mm[k] = training.beta1 * mm[k] + (1.0 - training.beta1) * grad[k];
          vv[k] = training.beta2 * vv[k] + (1.0 - training.beta2) * grad[k] * grad[k];
          const double mhat = mm[k] / c1;
          const double vhat = vv[k] / c2;
          param[k] -= training.learning_rate * mhat / (std::sqrt(vhat) + training.epsilon);
        }
      };
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        update(model.layers[l].weights, g.d_weights[l], m.d_weights[l], v.d_weights[l]);
        update(model.layers[l].bias, g.d_bias[l], m.d_bias[l], v.d_bias[l]);
      }
    }
  }
  return model;
}

}  // namespace habgate::models
