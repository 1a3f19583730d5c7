/**
 * @file model.hpp
 * @brief Model specifications, the fitted-model container and its JSON form.
 */
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "habgate/matrix.hpp"
#include "habgate/models/knn.hpp"
#include "habgate/models/mlp.hpp"
#include "habgate/models/naive_bayes.hpp"
#include "habgate/models/random_forest.hpp"
#include "habgate/preprocess.hpp"

namespace habgate::models {

enum class Family { Knn, NaiveBayes, RandomForest, Mlp };

std::string_view to_string(Family f);
Family parse_family(std::string_view s);

struct KnnParams {
  int k = 2;
  bool operator==(const KnnParams&) const = default;
};

struct NaiveBayesParams {
  NbVariant variant = NbVariant::Gaussian;
  bool operator==(const NaiveBayesParams&) const = default;
};

/// max_features = floor(sqrt(d)) and bootstrap sampling are fixed.
struct RandomForestParams {
  int n_trees = 100;
  bool operator==(const RandomForestParams&) const = default;
};

struct MlpParams {
  std::vector<int> hidden_layers{8};
  int epochs = 10;
  int batch_size = 5;
  double learning_rate = 0.001;
  bool class_weighting = true;
  bool operator==(const MlpParams&) const = default;
};

using ModelParams = std::variant<KnnParams, NaiveBayesParams, RandomForestParams, MlpParams>;

struct ModelSpec {
  ModelParams params;
  std::uint64_t seed = 0;

  [[nodiscard]] Family family() const { return static_cast<Family>(params.index()); }
  /// Short parameter label, e.g. "k=2", "gaussian", "trees=500", "hidden=10-20".
  [[nodiscard]] std::string describe() const;
  bool operator==(const ModelSpec&) const = default;
};

/// Admissible values of the grid (the SVM and XGBoost families are not built).
const std::vector<int>& knn_grid();
const std::vector<NbVariant>& nb_grid();
const std::vector<int>& forest_grid();
const std::vector<std::vector<int>>& mlp_grid();

/// Throws InvalidArgument when params fall outside the admissible ranges.
void validate(const ModelSpec& spec);

struct FeatureContribution {
  std::string feature;
  double open = 0.0;
  double closed = 0.0;
};

/// Label plus the evidence the fitted family used to produce it.
struct Prediction {
  Status label = Status::Open;
  std::vector<Neighbor> neighbors;            // kNN
  ForestVotes votes;                          // random forest
  std::optional<double> probability_closed;   // MLP
  std::vector<FeatureContribution> contributions;  // naive Bayes
  std::array<double, 2> log_prior{};               // naive Bayes
};

using FittedState = std::variant<KnnModel, NaiveBayesModel, ForestModel, MlpModel>;

struct TrainedModel {
  ModelSpec spec;
  std::vector<std::string> feature_names;
  preprocess::Scaler scaler;
  FittedState state;

  /// Raw (unscaled) row ordered as feature_names.
  [[nodiscard]] Status predict(std::span<const double> raw_row) const;
  [[nodiscard]] Prediction explain(std::span<const double> raw_row) const;
  /// Scaled dense rows; used by cross-validation to skip repeated scaling.
  [[nodiscard]] Status predict_scaled(std::span<const double> scaled_row) const;
};

/// Fits the scaler and the model on the view (rows = training rows).
TrainedModel fit_model(const ModelSpec& spec, const DataView& train);

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Prediction& p);

void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace habgate::models
