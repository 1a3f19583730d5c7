#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "habgate/featsel.hpp"
#include "habgate/models/random_forest.hpp"
#include "support.hpp"

using namespace habgate;
using namespace habgate::featsel;

namespace {

double brute_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("pearson correlation") {
  std::vector<double> a{1, 2, 3, 4, 5}, b{2, 4, 6, 8, 10}, c{5, 4, 3, 2, 1}, k{3, 3, 3, 3, 3};
  CHECK(pearson(a, b) == doctest::Approx(1.0));
  CHECK(pearson(a, c) == doctest::Approx(-1.0));
  CHECK(pearson(a, k) == 0.0);
  Rng r(4);
  std::vector<double> x(50), y(50);
  for (int i = 0; i < 50; ++i) {
    x[i] = r.normal();
    y[i] = 0.3 * x[i] + r.normal();
  }
  CHECK(pearson(x, y) == doctest::Approx(brute_pearson(x, y)).epsilon(1e-12));
}

TEST_CASE("a duplicated column is pruned with |r| = 1") {
  const auto m = testing::with_duplicate(testing::random_matrix(60, 5, 3), 2);
  const auto res = prune_correlated(DataView(m));
  CHECK(res.kept.size() == 5);
  REQUIRE(res.pairs.size() == 1);
  CHECK(res.pairs[0].kept == "f2");
  CHECK(res.pairs[0].dropped == "f2_dup");
  CHECK(res.pairs[0].abs_r == doctest::Approx(1.0));
}

TEST_CASE("pruning keeps the earlier column of a correlated pair") {
  auto m = testing::random_matrix(80, 4, 9);
  for (std::size_t r = 0; r < m.rows(); ++r) m.at(r, 0) = -2.0 * m.at(r, 3) + 1.0;
  const auto res = prune_correlated(DataView(m));
  REQUIRE(res.pairs.size() == 1);
  CHECK(res.pairs[0].kept == "f0");
  CHECK(res.pairs[0].dropped == "f3");
}

TEST_CASE("orthogonal random columns are all kept") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = testing::random_matrix(200, 12, seed);
    const DataView v(m);
    double max_r = 0.0;
    for (std::size_t i = 0; i < v.cols(); ++i)
      for (std::size_t j = i + 1; j < v.cols(); ++j)
        max_r = std::max(max_r, std::abs(brute_pearson(v.column_values(i), v.column_values(j))));
    REQUIRE(max_r < 0.9);
    CHECK(prune_correlated(v).kept.size() == 12);
  }
}

TEST_CASE("pruning is idempotent") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto m = testing::random_matrix(50, 8, seed);
    Rng r(seed);
    for (std::size_t row = 0; row < m.rows(); ++row) {
      m.at(row, 5) = m.at(row, 1) + 0.05 * r.normal();
      m.at(row, 7) = m.at(row, 5) * 3.0 + 0.02 * r.normal();
    }
    std::vector<PrunedPair> p1, p2;
    const auto once = prune_correlated(m, p1);
    const auto twice = prune_correlated(once, p2);
    CHECK(twice.feature_names == once.feature_names);
    CHECK(p2.empty());
    CHECK_FALSE(p1.empty());
  }
}

TEST_CASE("target correlation ranking") {
  auto m = testing::planted_matrix(100, 4, 7, 2);
  for (std::size_t r = 0; r < m.rows(); ++r) m.at(r, 4) = 1.0;  // constant column
  const auto rank = rank_by_target_correlation(DataView(m));
  REQUIRE(rank.ordered.size() == 5);
  CHECK(rank.ordered.front().first == "signal");
  CHECK(rank.ordered.front().second == doctest::Approx(1.0));
  CHECK(rank.ordered.back().first == "noise4");
  CHECK(rank.ordered.back().second == 0.0);
  CHECK(sorted(rank.names()) == sorted(m.feature_names));
}

TEST_CASE("independent feature has near-zero correlation at scale") {
  const auto m = testing::random_matrix(10000, 1, 21, 0.4);
  const auto rank = rank_by_target_correlation(DataView(m));
  CHECK(std::abs(rank.ordered[0].second) < 0.05);
}

TEST_CASE("target correlation is invariant under positive affine transforms") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto m = testing::random_matrix(60, 5, seed);
    auto t = m;
    Rng r(seed + 100);
    for (std::size_t c = 0; c < t.cols(); ++c) {
      const double a = r.uniform(0.01, 100.0), b = r.uniform(-50.0, 50.0);
      for (std::size_t row = 0; row < t.rows(); ++row) t.at(row, c) = a * t.at(row, c) + b;
    }
    const auto r1 = rank_by_target_correlation(DataView(m));
    const auto r2 = rank_by_target_correlation(DataView(t));
    for (std::size_t i = 0; i < r1.ordered.size(); ++i) {
      CHECK(r1.ordered[i].first == r2.ordered[i].first);
      CHECK(std::abs(r1.ordered[i].second - r2.ordered[i].second) < 1e-12);
    }
  }
}

TEST_CASE("forest importance ranks a perfect separator first") {
  const auto m = testing::planted_matrix(20, 2, 5, 1);
  const auto a = rank_by_rf_importance(DataView(m), 100, 3);
  const auto b = rank_by_rf_importance(DataView(m), 100, 3);
  CHECK(a.ordered.front().first == "signal");
  CHECK(a.ordered.front().second > 2.0 * a.ordered[1].second);
  REQUIRE(a.ordered.size() == b.ordered.size());
  for (std::size_t i = 0; i < a.ordered.size(); ++i) {
    CHECK(a.ordered[i].first == b.ordered[i].first);
    CHECK(a.ordered[i].second == b.ordered[i].second);
  }
  CHECK(sorted(a.names()) == sorted(m.feature_names));
}

TEST_CASE("one tree on one feature: importance is the total impurity decrease") {
  Dense x(10, 1);
  std::vector<Status> y(10);
  for (int i = 0; i < 10; ++i) {
    x.at(i, 0) = i;
    y[i] = i < 3 ? Status::Closed : Status::Open;
  }
  models::ForestOptions opt;
  opt.n_trees = 1;
  opt.bootstrap = false;
  const auto f = models::fit_forest(x, y, opt, 1);
  CHECK(f.importance[0] == doctest::Approx(models::gini(7, 3)));
  CHECK(models::gini(7, 3) == doctest::Approx(0.42));
}

TEST_CASE("quartile counts use ceil") {
  CHECK(quartile_count(76, 25) == 19);
  CHECK(quartile_count(50, 25) == 13);
  CHECK(quartile_count(76, 50) == 38);
  CHECK(quartile_count(76, 75) == 57);
  CHECK(quartile_count(76, 100) == 76);
  CHECK(quartile_count(1, 25) == 1);
  FeatureRanking r;
  for (int i = 0; i < 10; ++i) r.ordered.emplace_back("x" + std::to_string(i), 10.0 - i);
  CHECK(take_quartile(r, 25) == std::vector<std::string>{"x0", "x1", "x2"});
  CHECK(take_quartile(r, 100).size() == 10);
}

TEST_CASE("selection applies pruning, then the correlation quartile, then the forest quartile") {
  const auto base = testing::planted_matrix(120, 15, 13, 4);
  const auto m = testing::with_duplicate(base, 4);
  SelectionSpec spec;
  spec.prune = true;
  spec.corr_quartile = 50;
  spec.rf_quartile = 25;
  const auto rep = select_features(DataView(m), spec, 99);
  CHECK(rep.n_input == 17);
  REQUIRE(rep.pruned_pairs.size() == 1);
  CHECK(rep.pruned_pairs[0].dropped == "signal_dup");
  CHECK(rep.subsets.at("pruned").size() == 16);
  CHECK(rep.subsets.at("corr50").size() == 8);
  CHECK(rep.subsets.at("rf25").size() == 2);
  CHECK(rep.selected == rep.subsets.at("rf25"));
  CHECK(rep.selected.front() == "signal");
  for (const auto& f : rep.selected) {
    const auto& c = rep.subsets.at("corr50");
    CHECK(std::find(c.begin(), c.end(), f) != c.end());
  }
  CHECK(std::set<std::string>(rep.selected.begin(), rep.selected.end()).size() == rep.selected.size());

  SelectionSpec none;
  CHECK(select_features(DataView(m), none, 1).selected == m.feature_names);
}

TEST_CASE("selection specs are validated") {
  SelectionSpec s;
  s.corr_quartile = 30;
  CHECK_THROWS_AS(validate(s), Error);
  s.corr_quartile = 25;
  s.threshold = 1.5;
  CHECK_THROWS_AS(validate(s), Error);
  const auto j = to_json(SelectionSpec{true, 50, 75});
  CHECK(selection_spec_from_json(j) == SelectionSpec{true, 50, 75});
}
