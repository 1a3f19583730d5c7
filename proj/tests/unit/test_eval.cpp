#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

#include "habgate/eval.hpp"
#include "support.hpp"

using namespace habgate;
using namespace habgate::eval;

namespace {

constexpr Status O = Status::Open;
constexpr Status C = Status::Closed;

EvalOutcome outcome(double sens, double acc, double kap, double feats, std::size_t cell) {
  EvalOutcome o;
  o.sensitivity = Summary{sens, 0.0, sens, 10};
  o.accuracy = Summary{acc, 0.0, acc, 10};
  o.kappa = Summary{kap, 0.0, kap, 10};
  o.mean_features = feats;
  o.cell_index = cell;
  return o;
}

/// Fails the test if any held-out row of the current fold is read through a training view.
class LeakageObserver : public FoldObserver {
 public:
  void begin_fold(std::size_t, const std::vector<std::size_t>& held_out) override {
    held_ = std::set<std::size_t>(held_out.begin(), held_out.end());
    ++folds;
  }
  void touched(std::size_t row) override {
    ++reads;
    if (held_.count(row)) ++leaks;
  }
  std::size_t folds = 0;
  std::size_t reads = 0;
  std::size_t leaks = 0;

 private:
  std::set<std::size_t> held_;
};

void check_partition(const std::vector<std::vector<std::size_t>>& folds, std::size_t n) {
  std::vector<int> seen(n, 0);
  std::size_t lo = n, hi = 0;
  for (const auto& f : folds) {
    lo = std::min(lo, f.size());
    hi = std::max(hi, f.size());
    for (std::size_t i : f) {
      REQUIRE(i < n);
      ++seen[i];
    }
  }
  CHECK(hi - lo <= 1);
  CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
}

}  // namespace

TEST_CASE("metrics on a known confusion matrix") {
  ConfusionMatrix cm{9, 2, 1, 8};
  CHECK(accuracy(cm) == doctest::Approx(0.85));
  CHECK(*sensitivity(cm) == doctest::Approx(0.9));
  CHECK(kappa(cm) == doctest::Approx(0.7));
  const std::vector<Status> truth{C, C, O, O}, pred{C, O, C, O};
  CHECK(confusion(truth, pred) == ConfusionMatrix{1, 1, 1, 1});
}

TEST_CASE("metric edge cases") {
  CHECK_FALSE(sensitivity(ConfusionMatrix{0, 3, 0, 7}).has_value());
  CHECK(kappa(ConfusionMatrix{0, 0, 0, 10}) == 1.0);
  CHECK(kappa(ConfusionMatrix{0, 10, 0, 0}) == 0.0);
  CHECK(kappa(ConfusionMatrix{0, 0, 4, 6}) == 0.0);
  CHECK_THROWS_AS(accuracy(ConfusionMatrix{}), Error);
  const std::vector<double> v{1.0, 3.0};
  const auto s = summarize(v);
  CHECK(s.mean == 2.0);
  CHECK(s.std == 1.0);
  CHECK(s.min == 1.0);
}

TEST_CASE("k-fold partitions") {
  const auto f = kfold_split(175, 10, 1);
  REQUIRE(f.size() == 10);
  for (std::size_t i = 0; i < 5; ++i) CHECK(f[i].size() == 18);
  for (std::size_t i = 5; i < 10; ++i) CHECK(f[i].size() == 17);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 20 + seed * 13;
    const std::size_t k = 2 + seed % 9;
    const auto folds = kfold_split(n, k, seed);
    CHECK(folds.size() == k);
    check_partition(folds, n);
    CHECK(kfold_split(n, k, seed) == folds);
  }
  CHECK(kfold_split(100, 10, 1) != kfold_split(100, 10, 2));
  CHECK_THROWS_AS(kfold_split(5, 10, 1), Error);
}

TEST_CASE("stratified folds balance each class") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto m = testing::random_matrix(90 + seed, 1, seed, 0.25);
    const auto folds = stratified_kfold_split(m.labels, 10, seed);
    check_partition(folds, m.rows());
    std::size_t lo = m.rows(), hi = 0;
    for (const auto& f : folds) {
      const auto c = static_cast<std::size_t>(std::count_if(f.begin(), f.end(), [&](std::size_t i) { return m.labels[i] == C; }));
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("a coin-flip learner has kappa near zero") {
  const auto m = testing::random_matrix(4000, 2, 3, 0.4);
  const Learner coin = [](const DataView&, std::uint64_t seed) -> Predictor {
    auto rng = std::make_shared<Rng>(seed);
    return [rng](std::span<const double>) { return rng->bernoulli(0.5) ? C : O; };
  };
  const auto o = cross_validate(m, coin, models::ModelSpec{}, featsel::SelectionSpec{}, 5);
  CHECK(std::abs(o.kappa.mean) < 0.05);
  CHECK(std::abs(o.accuracy.mean - 0.5) < 0.05);
}

TEST_CASE("a majority-class learner has zero sensitivity and zero kappa") {
  const auto m = testing::random_matrix(200, 2, 4, 0.3);
  const Learner open = [](const DataView&, std::uint64_t) -> Predictor {
    return [](std::span<const double>) { return O; };
  };
  const auto o = cross_validate(m, open, models::ModelSpec{}, featsel::SelectionSpec{}, 5);
  REQUIRE(o.sensitivity.has_value());
  CHECK(o.sensitivity->mean == 0.0);
  CHECK(o.kappa.mean == 0.0);
  const double open_frac = static_cast<double>(std::count(m.labels.begin(), m.labels.end(), O)) / 200.0;
  CHECK(o.accuracy.mean == doctest::Approx(open_frac).epsilon(0.02));
}

TEST_CASE("an oracle learner scores perfectly") {
  const auto m = testing::planted_matrix(150, 3, 8, 0);
  const Learner oracle = [](const DataView& train, std::uint64_t) -> Predictor {
    REQUIRE(train.name(0) == "signal");
    return [](std::span<const double> row) { return row[0] > 0.5 ? C : O; };
  };
  const auto o = cross_validate(m, oracle, models::ModelSpec{}, featsel::SelectionSpec{}, 5);
  CHECK(o.accuracy.mean == 1.0);
  CHECK(o.sensitivity->mean == 1.0);
  CHECK(o.kappa.mean == 1.0);
  CHECK(o.folds.size() == 10);
}

TEST_CASE("ranking: sensitivity, accuracy, kappa, fewer features, cell index") {
  CHECK(better(outcome(0.9, 0.5, 0.1, 10, 5), outcome(0.8, 0.99, 0.9, 1, 0)));
  CHECK(better(outcome(0.9, 0.8, 0.1, 10, 5), outcome(0.9, 0.7, 0.9, 1, 0)));
  CHECK(better(outcome(0.9, 0.8, 0.5, 10, 5), outcome(0.9, 0.8, 0.4, 1, 0)));
  CHECK(better(outcome(0.9, 0.8, 0.5, 3, 5), outcome(0.9, 0.8, 0.5, 4, 0)));
  CHECK(better(outcome(0.9, 0.8, 0.5, 3, 1), outcome(0.9, 0.8, 0.5, 3, 2)));
  EvalOutcome undefined = outcome(0, 1.0, 1.0, 1, 0);
  undefined.sensitivity.reset();
  CHECK(better(outcome(0.0, 0.1, 0.0, 9, 9), undefined));

  std::vector<EvalOutcome> v{outcome(0.7, 0.8, 0.5, 3, 0), outcome(0.95, 0.1, 0.0, 3, 1), outcome(0.8, 0.8, 0.5, 3, 2)};
  v[1].error = "fold 2: boom";
  CHECK(select_best(v).cell_index == 2);
  v[0].error = v[2].error = "x";
  CHECK_THROWS_AS(select_best(v), Error);
}

TEST_CASE("best_per_family keeps one outcome per family") {
  std::vector<EvalOutcome> v{outcome(0.7, 0.8, 0.5, 3, 0), outcome(0.9, 0.8, 0.5, 3, 1), outcome(0.8, 0.8, 0.5, 3, 2)};
  v[0].spec.params = models::KnnParams{1};
  v[1].spec.params = models::KnnParams{2};
  v[2].spec.params = models::RandomForestParams{100};
  const auto best = best_per_family(v);
  REQUIRE(best.size() == 2);
  for (const auto& b : best) CHECK(b.cell_index != 0);
}

TEST_CASE("no held-out row is read while fitting") {
  auto m = testing::with_duplicate(testing::planted_matrix(120, 6, 2, 3), 1);
  for (const models::ModelSpec& spec : {models::ModelSpec{models::KnnParams{3}, 1},
                                        models::ModelSpec{models::RandomForestParams{100}, 1},
                                        models::ModelSpec{models::NaiveBayesParams{}, 1}, models::ModelSpec{models::MlpParams{}, 1}}) {
    for (const featsel::SelectionSpec& sel : {featsel::SelectionSpec{}, featsel::SelectionSpec{true, 50, 50}}) {
      LeakageObserver obs;
      CvOptions opt;
      opt.observer = &obs;
      const auto o = cross_validate(m, spec, sel, 4, opt);
      CHECK_FALSE(o.error.has_value());
      CHECK(obs.folds == 10);
      CHECK(obs.reads > 0);
      CHECK(obs.leaks == 0);
    }
  }
}

TEST_CASE("kNN with k=2 recovers a planted closure signal") {
  const auto m = testing::planted_matrix(175, 10, 31, 5);
  const auto o = cross_validate(m, models::ModelSpec{models::KnnParams{2}, 0}, featsel::SelectionSpec{}, 6);
  REQUIRE(o.sensitivity.has_value());
  CHECK(o.sensitivity->mean >= 0.9);
}

TEST_CASE("grid search is reproducible and independent of thread count") {
  const auto m = testing::planted_matrix(80, 5, 12, 2);
  Grid g;
  g.knn_k = {1, 2};
  g.nb_variants = {models::NbVariant::Gaussian};
  g.rf_trees = {100};
  g.mlp_hidden = {{2}};
  g.mlp_epochs = 2;
  g.corr_quartiles = {50, 100};
  g.rf_quartiles = {100};
  const auto a = grid_search(m, g, 21);
  g.threads = 3;
  const auto b = grid_search(m, g, 21);
  CHECK(a.ranked.size() == 2 * 2 * 5);
  CHECK(to_json(a) == to_json(b));
  CHECK(to_json(grid_result_from_json(to_json(a))) == to_json(a));
  CHECK(a.fold_seeds.size() == 2);
  for (std::size_t i = 1; i < a.ranked.size(); ++i)
    if (!a.ranked[i].error && !a.ranked[i - 1].error) CHECK_FALSE(better(a.ranked[i], a.ranked[i - 1]));
  CHECK(a.ranked.front().sensitivity->mean >= 0.9);

  const auto table = table_csv({a.ranked.front()});
  CHECK(table.find("zone,prune,corr_quartile") == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 2);
}

TEST_CASE("grid JSON round trip") {
  const Grid g = desk_grid();
  CHECK(g.rf_trees == std::vector<int>{100, 500});
  CHECK(to_json(grid_from_json(to_json(g))) == to_json(g));
  const auto specs = g.model_specs(3);
  CHECK(specs.size() == 10 + 4 + 2 + 5);
  CHECK(g.selection_specs().size() == 32);
}
