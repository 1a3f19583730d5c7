#include "habgate/matrix.hpp"

#include <algorithm>
#include <numeric>

namespace habgate {

bool DesignMatrix::is_null_row(std::size_t r) const {
  auto v = row(r);
  return std::any_of(v.begin(), v.end(), [](double x) { return is_missing(x); });
}

std::vector<bool> DesignMatrix::null_mask() const {
  std::vector<bool> mask(rows());
  for (std::size_t r = 0; r < rows(); ++r) mask[r] = is_null_row(r);
  return mask;
}

std::size_t DesignMatrix::column(const std::string& name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) throw Error(ErrorKind::FeatureMismatch, "no feature named '" + name + "'");
  return static_cast<std::size_t>(it - feature_names.begin());
}

void DesignMatrix::append_row(std::span<const double> row, Status label, IsoWeek week) {
  if (row.size() != cols()) {
    throw Error(ErrorKind::FeatureMismatch,
                "row has " + std::to_string(row.size()) + " values, matrix has " + std::to_string(cols()));
  }
  values.insert(values.end(), row.begin(), row.end());
  labels.push_back(label);
  weeks.push_back(week);
}

namespace {

std::vector<std::size_t> iota_vec(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace

DataView::DataView(const DesignMatrix& m) : matrix_(&m), rows_(iota_vec(m.rows())), cols_(iota_vec(m.cols())) {}

DataView::DataView(const DesignMatrix& m, std::vector<std::size_t> rows, std::vector<std::size_t> cols,
                   AccessRecorder* recorder)
    : matrix_(&m), rows_(std::move(rows)), cols_(std::move(cols)), recorder_(recorder) {
  for (auto r : rows_) {
    if (r >= m.rows()) throw Error(ErrorKind::InvalidArgument, "row index out of range");
  }
  for (auto c : cols_) {
    if (c >= m.cols()) throw Error(ErrorKind::InvalidArgument, "column index out of range");
  }
}

std::vector<std::string> DataView::names() const {
  std::vector<std::string> out;
  out.reserve(cols_.size());
  for (auto c : cols_) out.push_back(matrix_->feature_names[c]);
  return out;
}

DataView DataView::select_columns(const std::vector<std::size_t>& positions) const {
  std::vector<std::size_t> cols;
  cols.reserve(positions.size());
  for (auto p : positions) {
    if (p >= cols_.size()) throw Error(ErrorKind::InvalidArgument, "column position out of range");
    cols.push_back(cols_[p]);
  }
  return DataView(*matrix_, rows_, std::move(cols), recorder_);
}

DataView DataView::select_named(const std::vector<std::string>& names) const {
  std::vector<std::size_t> positions;
  positions.reserve(names.size());
  for (const auto& n : names) {
    std::size_t found = cols_.size();
    for (std::size_t c = 0; c < cols_.size(); ++c) {
      if (matrix_->feature_names[cols_[c]] == n) {
        found = c;
        break;
      }
    }
    if (found == cols_.size()) throw Error(ErrorKind::FeatureMismatch, "view has no feature named '" + n + "'");
    positions.push_back(found);
  }
  return select_columns(positions);
}

std::vector<double> DataView::column_values(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
  return out;
}

std::vector<double> DataView::labels01() const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = encode(label(r));
  return out;
}

Dense materialize(const DataView& view) {
  Dense d(view.rows(), view.cols());
  for (std::size_t r = 0; r < view.rows(); ++r)
    for (std::size_t c = 0; c < view.cols(); ++c) d.at(r, c) = view.at(r, c);
  return d;
}

std::vector<Status> materialize_labels(const DataView& view) {
  std::vector<Status> out(view.rows());
  for (std::size_t r = 0; r < view.rows(); ++r) out[r] = view.label(r);
  return out;
}

}  // namespace habgate
