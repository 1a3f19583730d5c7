#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "habgate/core.hpp"

namespace habgate {

/**
 * @brief Per-zone table of engineered weekly features with Monday labels.
 *
 * Values are row-major; NaN marks a missing feature. Column order is the
 * canonical order used by every tie-break downstream.
 */
struct DesignMatrix {
  std::string zone_id;
  std::vector<std::string> feature_names;
  std::vector<IsoWeek> weeks;
  std::vector<double> values;
  std::vector<Status> labels;

  [[nodiscard]] std::size_t rows() const { return labels.size(); }
  [[nodiscard]] std::size_t cols() const { return feature_names.size(); }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }
  /// True when the row has at least one missing value.
  [[nodiscard]] bool is_null_row(std::size_t r) const;
  [[nodiscard]] std::vector<bool> null_mask() const;
  /// Index of a named column, or throws FeatureMismatch.
  [[nodiscard]] std::size_t column(const std::string& name) const;

  void append_row(std::span<const double> row, Status label, IsoWeek week = {});
};

/// Sink notified whenever a view reads a row of its parent matrix.
class AccessRecorder {
 public:
  virtual ~AccessRecorder() = default;
  virtual void touched(std::size_t parent_row) = 0;
};

/**
 * @brief Read-only window onto a subset of rows and columns of a matrix.
 *
 * Every fitting routine (scaler, selection, models) reads training data
 * exclusively through a view so instrumentation can attribute reads.
 */
class DataView {
 public:
  /// All rows and columns.
  explicit DataView(const DesignMatrix& m);
  DataView(const DesignMatrix& m, std::vector<std::size_t> rows, std::vector<std::size_t> cols,
           AccessRecorder* recorder = nullptr);

  [[nodiscard]] std::size_t rows() const { return rows_.size(); }
  [[nodiscard]] std::size_t cols() const { return cols_.size(); }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const {
    if (recorder_) recorder_->touched(rows_[r]);
    return matrix_->at(rows_[r], cols_[c]);
  }
  [[nodiscard]] Status label(std::size_t r) const {
    if (recorder_) recorder_->touched(rows_[r]);
    return matrix_->labels[rows_[r]];
  }
  [[nodiscard]] const std::string& name(std::size_t c) const { return matrix_->feature_names[cols_[c]]; }
  [[nodiscard]] std::vector<std::string> names() const;
  [[nodiscard]] const std::vector<std::size_t>& row_ids() const { return rows_; }
  [[nodiscard]] const std::vector<std::size_t>& col_ids() const { return cols_; }
  [[nodiscard]] const DesignMatrix& parent() const { return *matrix_; }
  [[nodiscard]] AccessRecorder* recorder() const { return recorder_; }

  /// Same rows, columns restricted to the given positions of this view.
  [[nodiscard]] DataView select_columns(const std::vector<std::size_t>& positions) const;
  /// Same rows, columns restricted to the given names (in the given order).
  [[nodiscard]] DataView select_named(const std::vector<std::string>& names) const;
  [[nodiscard]] std::vector<double> column_values(std::size_t c) const;
  [[nodiscard]] std::vector<double> labels01() const;

 private:
  const DesignMatrix* matrix_;
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> cols_;
  AccessRecorder* recorder_ = nullptr;
};

/// Dense row-major numeric block used by the models after materialization.
struct Dense {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> data;

  Dense() = default;
  Dense(std::size_t r, std::size_t c) : n_rows(r), n_cols(c), data(r * c, 0.0) {}
  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return data[r * n_cols + c]; }
  double& at(std::size_t r, std::size_t c) { return data[r * n_cols + c]; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const { return {data.data() + r * n_cols, n_cols}; }
};

/// Copies a view into a dense block (and its labels).
Dense materialize(const DataView& view);
std::vector<Status> materialize_labels(const DataView& view);

}  // namespace habgate
