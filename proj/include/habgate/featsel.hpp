/**
 * @file featsel.hpp
 * @brief Correlation pruning, target-correlation and forest-importance
 *        rankings, and quartile subsets.
 */
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "habgate/matrix.hpp"

namespace habgate::featsel {

constexpr double kDefaultPruneThreshold = 0.90;
constexpr int kDefaultRankForestTrees = 100;

enum class RankMethod { CorrelationFilter, RandomForestEmbedded };

std::string_view to_string(RankMethod m);

struct PrunedPair {
  std::string kept;
  std::string dropped;
  double abs_r = 0.0;
};

struct FeatureRanking {
  RankMethod method = RankMethod::CorrelationFilter;
  /// (feature name, score), best first.
  std::vector<std::pair<std::string, double>> ordered;

  [[nodiscard]] std::vector<std::string> names() const;
};

/// Pearson correlation; 0 when either input has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

struct PruneResult {
  /// Surviving column positions of the input view, in canonical order.
  std::vector<std::size_t> kept;
  std::vector<PrunedPair> pairs;
};

/**
 * @brief Greedy pruning of highly correlated columns.
 *
 * Columns are visited in canonical order; a column is dropped when its
 * |r| with an already kept column exceeds the threshold. The recorded
 * partner is the kept column with the largest |r|.
 */
PruneResult prune_correlated(const DataView& view, double threshold = kDefaultPruneThreshold);

/// Matrix form: returns the pruned matrix and writes the dropped pairs.
DesignMatrix prune_correlated(const DesignMatrix& m, std::vector<PrunedPair>& pairs,
                              double threshold = kDefaultPruneThreshold);

/// |point-biserial r| with the label, descending, ties by column order.
FeatureRanking rank_by_target_correlation(const DataView& view);

/// Mean decrease in Gini impurity from a forest grown on the view.
FeatureRanking rank_by_rf_importance(const DataView& view, int n_trees, std::uint64_t seed);

/// ceil(pct / 100 * n); pct in (0, 100].
std::size_t quartile_count(std::size_t n, int pct);
/// Top ceil(pct/100 * n) names of the ranking.
std::vector<std::string> take_quartile(const FeatureRanking& ranking, int pct);

/// One cell of the selection grid. A quartile of 100 disables that ranker.
struct SelectionSpec {
  bool prune = false;
  int corr_quartile = 100;
  int rf_quartile = 100;
  double threshold = kDefaultPruneThreshold;
  int rank_forest_trees = kDefaultRankForestTrees;

  bool operator==(const SelectionSpec&) const = default;
};

void validate(const SelectionSpec& spec);

struct SelectionReport {
  std::string zone_id;
  SelectionSpec spec;
  std::uint64_t seed = 0;
  std::size_t n_input = 0;
  std::vector<PrunedPair> pruned_pairs;
  FeatureRanking correlation;  // empty when corr_quartile == 100
  FeatureRanking importance;   // empty when rf_quartile == 100
  /// "pruned", "corr<q>", "rf<q>" -> feature list at that stage.
  std::map<std::string, std::vector<std::string>> subsets;
  std::vector<std::string> selected;
};

/**
 * @brief Prune, then keep the correlation quartile, then the forest
 *        quartile of the survivors.
 */
SelectionReport select_features(const DataView& view, const SelectionSpec& spec, std::uint64_t seed);

/**
 * @brief Memoizing form of select_features for one training view.
 *
 * Pruning and rankings are shared between specs that agree on the earlier
 * stages, so a grid of selection cells costs one pruning pass and one
 * forest per (prune, corr_quartile) pair. Results equal select_features.
 */
class SelectionPlanner {
 public:
  SelectionPlanner(DataView view, std::uint64_t seed) : view_(std::move(view)), seed_(seed) {}

  SelectionReport select(const SelectionSpec& spec);

 private:
  struct Pruned {
    std::vector<PrunedPair> pairs;
    std::vector<std::size_t> kept;
    FeatureRanking correlation;
    bool ranked = false;
  };

  Pruned& pruned(bool prune, double threshold);

  DataView view_;
  std::uint64_t seed_;
  std::map<std::pair<bool, double>, Pruned> pruned_;
  std::map<std::tuple<bool, double, int, int>, FeatureRanking> importance_;
};

nlohmann::json to_json(const FeatureRanking& r);
nlohmann::json to_json(const SelectionSpec& s);
SelectionSpec selection_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SelectionReport& r);

}  // namespace habgate::featsel
