#include "habgate/models/knn.hpp"

#include <algorithm>
#include <cmath>

namespace habgate::models {

KnnModel knn_fit(Dense train, std::vector<Status> labels, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  if (train.n_rows != labels.size()) throw Error(ErrorKind::InvalidArgument, "label count does not match rows");
  if (static_cast<std::size_t>(k) > train.n_rows) {
    throw Error(ErrorKind::TrainTooSmall,
                "k = " + std::to_string(k) + " exceeds " + std::to_string(train.n_rows) + " training rows");
  }
  return KnnModel{k, std::move(train), std::move(labels)};
}

std::vector<Neighbor> KnnModel::neighbors(std::span<const double> row) const {
  if (row.size() != train.n_cols) throw Error(ErrorKind::FeatureMismatch, "query arity differs from training data");
  std::vector<std::pair<double, std::size_t>> d2(train.n_rows);
  for (std::size_t i = 0; i < train.n_rows; ++i) {
    auto t = train.row(i);
    double s = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      double diff = row[c] - t[c];
      s += diff * diff;
    }
    d2[i] = {s, i};
  }
  const auto kk = static_cast<std::size_t>(k);
  std::partial_sort(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(kk), d2.end());
  std::vector<Neighbor> out;
  out.reserve(kk);
  for (std::size_t i = 0; i < kk; ++i) out.push_back({d2[i].second, std::sqrt(d2[i].first), labels[d2[i].second]});
  return out;
}

Status KnnModel::predict(std::span<const double> row) const {
  std::size_t closed = 0;
  auto nn = neighbors(row);
  for (const auto& n : nn) closed += n.label == Status::Closed;
  return 2 * closed >= nn.size() ? Status::Closed : Status::Open;
}

}  // namespace habgate::models
