#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "habgate/core.hpp"
#include "habgate/matrix.hpp"

namespace habgate::models {

enum class NbVariant { Gaussian, Multinomial, Complement, Bernoulli };

std::string_view to_string(NbVariant v);
NbVariant parse_nb_variant(std::string_view s);

inline constexpr double kNbSmoothing = 1.0;     // Laplace alpha for count variants
inline constexpr double kNbVarianceFloor = 1e-9;
inline constexpr double kBernoulliThreshold = 0.5;

/// Class index 0 = Open, 1 = Closed throughout.
struct NaiveBayesModel {
  NbVariant variant = NbVariant::Gaussian;
  std::size_t n_features = 0;
  std::array<double, 2> log_prior{};
  // Gaussian
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> var;
  // Multinomial / Complement: per-class weights w such that score += x * w.
  // Bernoulli: log p and log(1 - p).
  std::array<std::vector<double>, 2> log_prob;
  std::array<std::vector<double>, 2> log_neg_prob;

  /// Per-feature log-likelihood contribution to each class score.
  [[nodiscard]] std::vector<std::array<double, 2>> contributions(std::span<const double> row) const;
  [[nodiscard]] std::array<double, 2> scores(std::span<const double> row) const;
  /// argmax of the class scores; equal scores go to Closed.
  [[nodiscard]] Status predict(std::span<const double> row) const;
};

/**
 * @brief Fits one of the four naive Bayes variants.
 *
 * Multinomial and Complement require non-negative training features
 * (NegativeFeature otherwise). Bernoulli binarizes x > 0.5.
 */
NaiveBayesModel nb_fit(const Dense& x, std::span<const Status> y, NbVariant variant);

}  // namespace habgate::models
