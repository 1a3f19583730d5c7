#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "habgate/core.hpp"
#include "habgate/matrix.hpp"

namespace habgate::models {

/// Flat CART node. Leaves have feature == -1.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;  // go left when x <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t n_open = 0;
  std::uint32_t n_closed = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  [[nodiscard]] const TreeNode& leaf_for(std::span<const double> row) const;
  /// Majority class of the reached leaf; ties go to Closed.
  [[nodiscard]] Status predict(std::span<const double> row) const;
};

struct ForestOptions {
  int n_trees = 100;
  /// Candidate features per node; 0 means floor(sqrt(d)).
  int max_features = 0;
  bool bootstrap = true;
  /// Worker threads for tree growth. Output does not depend on this.
  unsigned threads = 1;
};

struct ForestVotes {
  std::size_t open = 0;
  std::size_t closed = 0;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::size_t n_features = 0;
  /// Mean over trees of the sample-weighted Gini decrease per feature.
  std::vector<double> importance;

  [[nodiscard]] ForestVotes votes(std::span<const double> row) const;
  [[nodiscard]] Status predict(std::span<const double> row) const;
};

/**
 * @brief Grows a random forest of unpruned Gini CART trees.
 *
 * Tree t draws from Rng(mix_seed(seed, t)), so the forest is identical for
 * any thread count.
 */
ForestModel fit_forest(const Dense& x, std::span<const Status> y, const ForestOptions& options, std::uint64_t seed);

/// Gini impurity of a two-class node.
double gini(std::size_t n_open, std::size_t n_closed);

}  // namespace habgate::models
