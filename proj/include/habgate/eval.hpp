/**
 * @file eval.hpp
 * @brief Closure-positive metrics, k-fold cross-validation, grid search and
 *        best-model selection.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "habgate/featsel.hpp"
#include "habgate/matrix.hpp"
#include "habgate/models/model.hpp"

namespace habgate::eval {

/// Closed is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  [[nodiscard]] std::size_t total() const { return tp + fp + fn + tn; }
  void add(Status truth, Status predicted);
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const Status> truth, std::span<const Status> predicted);

/// (tp + tn) / N. Throws EmptyMatrix when N == 0.
double accuracy(const ConfusionMatrix& cm);
/// tp / (tp + fn); nullopt when the fold holds no closures.
std::optional<double> sensitivity(const ConfusionMatrix& cm);
/// Cohen's kappa. When chance agreement is 1: 1 if accuracy is 1, else 0.
double kappa(const ConfusionMatrix& cm);

/**
 * @brief Random partition of 0..n-1 into k blocks.
 *
 * Indices are permuted with Rng(seed) and cut into consecutive blocks; the
 * first n % k blocks receive one extra index.
 */
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

/// Per-class round-robin over shuffled indices; block sizes still differ by at most 1.
std::vector<std::vector<std::size_t>> stratified_kfold_split(std::span<const Status> labels, std::size_t k,
                                                             std::uint64_t seed);

struct FoldMetrics {
  ConfusionMatrix cm;
  double accuracy = 0.0;
  std::optional<double> sensitivity;
  double kappa = 0.0;
  std::size_t n_features = 0;
};

/// Population statistics over the defined values.
struct Summary {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  std::size_t n = 0;
};

Summary summarize(std::span<const double> values);

struct EvalOutcome {
  std::string zone_id;
  models::ModelSpec spec;
  featsel::SelectionSpec selection;
  std::uint64_t fold_seed = 0;
  /// Position in the grid enumeration; the last tie-break.
  std::size_t cell_index = 0;
  std::vector<FoldMetrics> folds;
  Summary accuracy;
  std::optional<Summary> sensitivity;  // nullopt when no fold had closures
  Summary kappa;
  double mean_features = 0.0;
  /// Folds without closures, left out of the sensitivity summary.
  std::size_t undefined_sensitivity_folds = 0;
  /// Set when a fold failed; metrics are then empty.
  std::optional<std::string> error;

  [[nodiscard]] double sensitivity_mean() const { return sensitivity ? sensitivity->mean : -1.0; }
};

/// Fills the summaries from folds.
void finalize(EvalOutcome& outcome);

/// Raw-row classifier produced by a learner for one training fold.
using Predictor = std::function<Status(std::span<const double> raw_row)>;
/// Fits on the view (already restricted to the selected columns).
using Learner = std::function<Predictor(const DataView& train, std::uint64_t seed)>;

/// Receives fold boundaries during cross-validation; extends the access recorder.
class FoldObserver : public AccessRecorder {
 public:
  virtual void begin_fold(std::size_t /*fold*/, const std::vector<std::size_t>& /*held_out*/) {}
  void touched(std::size_t) override {}
};

struct CvOptions {
  std::size_t k = 10;
  bool stratified = false;
  /// Attached to every training view; never sees prediction reads.
  FoldObserver* observer = nullptr;
};

/// Folds used for a matrix under the options.
std::vector<std::vector<std::size_t>> make_folds(const DesignMatrix& matrix, const CvOptions& options,
                                                 std::uint64_t seed);

/**
 * @brief k-fold cross-validation of one model and selection cell.
 *
 * Per fold, selection and scaling are fit on the training blocks only.
 * Model errors are rethrown with the fold number prefixed.
 */
EvalOutcome cross_validate(const DesignMatrix& matrix, const models::ModelSpec& spec,
                           const featsel::SelectionSpec& selection, std::uint64_t seed, const CvOptions& options = {});

/// Same with an arbitrary learner (spec is recorded but not used for fitting).
EvalOutcome cross_validate(const DesignMatrix& matrix, const Learner& learner, const models::ModelSpec& spec,
                           const featsel::SelectionSpec& selection, std::uint64_t seed, const CvOptions& options = {});

struct Grid {
  std::vector<int> knn_k{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<models::NbVariant> nb_variants{models::NbVariant::Gaussian, models::NbVariant::Multinomial,
                                             models::NbVariant::Complement, models::NbVariant::Bernoulli};
  std::vector<int> rf_trees{100, 500, 1000, 1500, 2000};
  std::vector<std::vector<int>> mlp_hidden{{2}, {8}, {14}, {10, 10}, {10, 20}};
  int mlp_epochs = 10;
  std::vector<int> corr_quartiles{25, 50, 75, 100};
  std::vector<int> rf_quartiles{25, 50, 75, 100};
  std::vector<bool> prune{false, true};
  double prune_threshold = featsel::kDefaultPruneThreshold;
  int rank_forest_trees = featsel::kDefaultRankForestTrees;
  std::size_t folds = 10;
  bool stratified = false;
  unsigned threads = 1;

  /// Model specs in canonical order (kNN, NB, RF, MLP), all carrying seed.
  [[nodiscard]] std::vector<models::ModelSpec> model_specs(std::uint64_t seed) const;
  /// Selection cells in canonical order (prune, corr quartile, rf quartile).
  [[nodiscard]] std::vector<featsel::SelectionSpec> selection_specs() const;
};

/// Full in-scope grid with the tree counts reduced to {100, 500}.
Grid desk_grid();

nlohmann::json to_json(const Grid& g);
Grid grid_from_json(const nlohmann::json& j);
Grid load_grid(const std::filesystem::path& path);

/// Lexicographic: sensitivity, accuracy, kappa (all desc), fewer features, cell index.
bool better(const EvalOutcome& a, const EvalOutcome& b);

struct GridResult {
  std::string zone_id;
  std::uint64_t seed = 0;
  /// One fold seed per pruning approach, indexed like Grid::prune.
  std::vector<std::uint64_t> fold_seeds;
  /// Successful outcomes ranked best first, then failed cells in cell order.
  std::vector<EvalOutcome> ranked;
  /// Selected features per (selection cell, fold), parallel to Grid::selection_specs().
  std::vector<std::vector<std::vector<std::string>>> selections;
};

/**
 * @brief Every (model params x quartile pair x prune flag) cell.
 *
 * Folds depend only on (seed, prune flag); per-fold selections are computed
 * once and shared by all models. Output is independent of grid.threads.
 */
GridResult grid_search(const DesignMatrix& matrix, const Grid& grid, std::uint64_t seed);

/// Recorder for the training view of one (prune flag, fold); must be thread-safe when grid.threads > 1.
using RecorderFactory =
    std::function<AccessRecorder*(bool prune, std::size_t fold, const std::vector<std::size_t>& held_out)>;

/// Same, with every training view instrumented by the factory's recorder.
GridResult grid_search(const DesignMatrix& matrix, const Grid& grid, std::uint64_t seed,
                       const RecorderFactory& recorders);

/// Best successful outcome. Throws InvalidArgument if none.
const EvalOutcome& select_best(const std::vector<EvalOutcome>& outcomes);

/// Best successful outcome for each family present.
std::vector<EvalOutcome> best_per_family(const std::vector<EvalOutcome>& outcomes);

nlohmann::json to_json(const EvalOutcome& o);
EvalOutcome outcome_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GridResult& r);
GridResult grid_result_from_json(const nlohmann::json& j);

/// Tables 5/6 shape: one row per outcome; quartile 100 is written as "-".
std::string table_csv(const std::vector<EvalOutcome>& rows);
void write_table_csv(const std::filesystem::path& path, const std::vector<EvalOutcome>& rows);

/// Fraction of (fold, filtering cell) selections containing each feature, per zone.
struct Persistence {
  std::vector<std::string> features;
  std::vector<std::string> zones;
  std::vector<std::vector<double>> frequency;  // [feature][zone]
};

Persistence persistence(const std::vector<GridResult>& results, const Grid& grid,
                        const std::vector<std::string>& feature_order);
std::string persistence_csv(const Persistence& p);
void write_persistence_csv(const std::filesystem::path& path, const Persistence& p);

}  // namespace habgate::eval
