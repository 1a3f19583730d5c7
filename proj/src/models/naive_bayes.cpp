#include "habgate/models/naive_bayes.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace habgate::models {

std::string_view to_string(NbVariant v) {
  switch (v) {
    case NbVariant::Gaussian: return "gaussian";
    case NbVariant::Multinomial: return "multinomial";
    case NbVariant::Complement: return "complement";
    case NbVariant::Bernoulli: return "bernoulli";
  }
  return "gaussian";
}

NbVariant parse_nb_variant(std::string_view s) {
  for (auto v : {NbVariant::Gaussian, NbVariant::Multinomial, NbVariant::Complement, NbVariant::Bernoulli}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown naive Bayes variant '" + std::string(s) + "'");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double binarize(double x) { return x > kBernoulliThreshold ? 1.0 : 0.0; }

}  // namespace

NaiveBayesModel nb_fit(const Dense& x, std::span<const Status> y, NbVariant variant) {
  if (x.n_rows == 0) throw Error(ErrorKind::TrainTooSmall, "naive Bayes needs at least one training row");
  if (y.size() != x.n_rows) throw Error(ErrorKind::InvalidArgument, "label count does not match rows");
  const std::size_t d = x.n_cols;
  const bool counts = variant == NbVariant::Multinomial || variant == NbVariant::Complement;
  if (counts) {
    for (double v : x.data) {
      if (v < 0.0) throw Error(ErrorKind::NegativeFeature, std::string(to_string(variant)) +
                                                               " naive Bayes requires non-negative features");
    }
  }

  NaiveBayesModel m;
  m.variant = variant;
  m.n_features = d;
  std::array<std::size_t, 2> n_class{};
  for (auto s : y) ++n_class[s == Status::Closed];
  for (int c = 0; c < 2; ++c) {
    m.log_prior[c] = n_class[c] ? std::log(static_cast<double>(n_class[c]) / static_cast<double>(x.n_rows)) : kNegInf;
  }

  // Per-class feature sums.
  std::array<std::vector<double>, 2> sum{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t r = 0; r < x.n_rows; ++r) {
    const int c = y[r] == Status::Closed;
    for (std::size_t j = 0; j < d; ++j) sum[c][j] += variant == NbVariant::Bernoulli ? binarize(x.at(r, j)) : x.at(r, j);
  }

  switch (variant) {
    case NbVariant::Gaussian: {
      for (int c = 0; c < 2; ++c) {
        m.mean[c].assign(d, 0.0);
        m.var[c].assign(d, kNbVarianceFloor);
        if (!n_class[c]) continue;
        for (std::size_t j = 0; j < d; ++j) m.mean[c][j] = sum[c][j] / static_cast<double>(n_class[c]);
      }
      std::array<std::vector<double>, 2> ss{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
      for (std::size_t r = 0; r < x.n_rows; ++r) {
        const int c = y[r] == Status::Closed;
        for (std::size_t j = 0; j < d; ++j) {
          double e = x.at(r, j) - m.mean[c][j];
          ss[c][j] += e * e;
        }
      }
      for (int c = 0; c < 2; ++c) {
        if (!n_class[c]) continue;
        for (std::size_t j = 0; j < d; ++j) {
          m.var[c][j] = std::max(ss[c][j] / static_cast<double>(n_class[c]), kNbVarianceFloor);
        }
      }
      break;
    }
    case NbVariant::Multinomial: {
      for (int c = 0; c < 2; ++c) {
        double total = 0.0;
        for (double v : sum[c]) total += v;
        m.log_prob[c].resize(d);
        for (std::size_t j = 0; j < d; ++j) {
          m.log_prob[c][j] = std::log((sum[c][j] + kNbSmoothing) / (total + kNbSmoothing * static_cast<double>(d)));
        }
      }
      break;
    }
    case NbVariant::Complement: {
      // Class c is scored against the feature distribution of the other class.
      for (int c = 0; c < 2; ++c) {
        const auto& other = sum[1 - c];
        double total = 0.0;
        for (double v : other) total += v;
        m.log_prob[c].resize(d);
        for (std::size_t j = 0; j < d; ++j) {
          m.log_prob[c][j] = -std::log((other[j] + kNbSmoothing) / (total + kNbSmoothing * static_cast<double>(d)));
        }
      }
      break;
    }
    case NbVariant::Bernoulli: {
      for (int c = 0; c < 2; ++c) {
        m.log_prob[c].resize(d);
        m.log_neg_prob[c].resize(d);
        for (std::size_t j = 0; j < d; ++j) {
          double p = (sum[c][j] + kNbSmoothing) / (static_cast<double>(n_class[c]) + 2.0 * kNbSmoothing);
          m.log_prob[c][j] = std::log(p);
          m.log_neg_prob[c][j] = std::log1p(-p);
        }
      }
      break;
    }
  }
  return m;
}

std::vector<std::array<double, 2>> NaiveBayesModel::contributions(std::span<const double> row) const {
  if (row.size() != n_features) throw Error(ErrorKind::FeatureMismatch, "query arity differs from training data");
  std::vector<std::array<double, 2>> out(n_features, {0.0, 0.0});
  for (int c = 0; c < 2; ++c) {
    if (log_prior[c] == kNegInf) continue;
    for (std::size_t j = 0; j < n_features; ++j) {
      const double x = row[j];
      switch (variant) {
        case NbVariant::Gaussian: {
          const double v = var[c][j];
          const double e = x - mean[c][j];
          out[j][c] = -0.5 * std::log(2.0 * std::numbers::pi * v) - e * e / (2.0 * v);
          break;
        }
        case NbVariant::Multinomial:
        case NbVariant::Complement: out[j][c] = x * log_prob[c][j]; break;
        case NbVariant::Bernoulli: {
          out[j][c] = binarize(x) > 0.0 ? log_prob[c][j] : log_neg_prob[c][j];
          break;
        }
      }
    }
  }
  return out;
}

std::array<double, 2> NaiveBayesModel::scores(std::span<const double> row) const {
  std::array<double, 2> s = log_prior;
  for (const auto& c : contributions(row)) {
    s[0] += c[0];
    s[1] += c[1];
  }
  return s;
}

Status NaiveBayesModel::predict(std::span<const double> row) const {
  auto s = scores(row);
  return s[1] >= s[0] ? Status::Closed : Status::Open;
}

}  // namespace habgate::models
