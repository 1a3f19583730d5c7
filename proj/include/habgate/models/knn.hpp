#pragma once

#include <span>
#include <vector>

#include "habgate/core.hpp"
#include "habgate/matrix.hpp"

namespace habgate::models {

struct Neighbor {
  std::size_t index = 0;  // training row
  double distance = 0.0;
  Status label = Status::Open;
};

/// Stores the (already scaled) training rows; Euclidean metric.
struct KnnModel {
  int k = 1;
  Dense train;
  std::vector<Status> labels;

  /// The k nearest training rows ordered by (distance, row index).
  [[nodiscard]] std::vector<Neighbor> neighbors(std::span<const double> row) const;
  /// Majority vote among the neighbors; a split vote goes to Closed.
  [[nodiscard]] Status predict(std::span<const double> row) const;
};

/// Throws TrainTooSmall when k exceeds the number of training rows.
KnnModel knn_fit(Dense train, std::vector<Status> labels, int k);

}  // namespace habgate::models
