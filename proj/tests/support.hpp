/**
 * @file support.hpp
 * @brief Hand-rolled generators shared by the unit, property and acceptance tests.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "habgate/core.hpp"
#include "habgate/matrix.hpp"

namespace habgate::testing {

/// n rows of d uniform columns named f0..f{d-1}; labels Closed with probability p_closed.
inline DesignMatrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed, double p_closed = 0.3) {
  Rng rng(seed);
  DesignMatrix m;
  m.zone_id = "Test";
  for (std::size_t c = 0; c < d; ++c) m.feature_names.push_back("f" + std::to_string(c));
  std::vector<double> row(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (auto& v : row) v = rng.uniform();
    m.append_row(row, rng.bernoulli(p_closed) ? Status::Closed : Status::Open, IsoWeek{2004 + static_cast<int>(r / 52), 1 + static_cast<int>(r % 52)});
  }
  return m;
}

/// Noise columns plus a column "signal" equal to the label, inserted at position `at`.
inline DesignMatrix planted_matrix(std::size_t n, std::size_t noise, std::uint64_t seed, std::size_t at = 0) {
  Rng rng(seed);
  DesignMatrix m;
  m.zone_id = "Planted";
  for (std::size_t c = 0; c <= noise; ++c) {
    m.feature_names.push_back(c == at ? std::string("signal") : "noise" + std::to_string(c));
  }
  std::vector<double> row(noise + 1);
  for (std::size_t r = 0; r < n; ++r) {
    const Status y = rng.bernoulli(0.35) ? Status::Closed : Status::Open;
    for (std::size_t c = 0; c <= noise; ++c) row[c] = c == at ? encode(y) : rng.normal();
    m.append_row(row, y);
  }
  return m;
}

/// Copy of m with column `src` appended again as "<name>_dup".
inline DesignMatrix with_duplicate(const DesignMatrix& m, std::size_t src) {
  DesignMatrix out;
  out.zone_id = m.zone_id;
  out.feature_names = m.feature_names;
  out.feature_names.push_back(m.feature_names[src] + "_dup");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::vector<double> row(m.row(r).begin(), m.row(r).end());
    row.push_back(m.at(r, src));
    out.append_row(row, m.labels[r], m.weeks[r]);
  }
  return out;
}

}  // namespace habgate::testing
