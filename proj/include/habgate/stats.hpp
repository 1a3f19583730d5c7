/**
 * @file stats.hpp
 * @brief Normality tests, one-way ANOVA and Tukey-Kramer comparisons.
 */
#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace habgate::stats {

struct SampleGroup {
  std::string name;
  std::vector<double> values;
};

struct TestResult {
  std::string test;
  double statistic = 0.0;
  double p_value = 1.0;
  std::optional<std::pair<double, double>> df;
  double alpha = 0.05;
  bool reject = false;
  /// Anderson-Darling only: corrected statistic and its 5% critical value.
  std::optional<double> adjusted_statistic;
  std::optional<double> critical_value;
};

/// Shapiro-Wilk W with Royston's (AS R94) coefficients and p-value. 3 <= n <= 50.
TestResult shapiro_wilk(std::span<const double> x, double alpha = 0.05);

/// Anderson-Darling A^2 against a normal with estimated mean and variance.
TestResult anderson_darling(std::span<const double> x, double alpha = 0.05);

/// Critical value for A*^2 at the usual case-4 levels (0.15, 0.10, 0.05, 0.025, 0.01).
double anderson_darling_critical(double alpha);

/// F test over at least two groups with n >= 2 each.
TestResult one_way_anova(std::span<const SampleGroup> groups, double alpha = 0.05);

/// Upper regularized tail of the F(d1, d2) distribution.
double f_survival(double f, double d1, double d2);

/// P(Q <= q) for the studentized range of k means with df degrees of freedom.
double studentized_range_cdf(double q, int k, double df);
/// Inverse of studentized_range_cdf in q.
double studentized_range_quantile(double p, int k, double df);

struct PairwiseResult {
  std::string a;
  std::string b;
  double mean_difference = 0.0;
  TestResult result;
};

/// All pairs, in group order (0,1), (0,2), ..., (1,2), ...
std::vector<PairwiseResult> tukey_kramer(std::span<const SampleGroup> groups, double alpha = 0.05);

nlohmann::json to_json(const TestResult& r);
nlohmann::json to_json(const PairwiseResult& r);

}  // namespace habgate::stats
