#include "habgate/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace habgate::eval {

using nlohmann::json;

void ConfusionMatrix::add(Status truth, Status predicted) {
  if (truth == Status::Closed) {
    ++(predicted == Status::Closed ? tp : fn);
  } else {
    ++(predicted == Status::Closed ? fp : tn);
  }
}

ConfusionMatrix confusion(std::span<const Status> truth, std::span<const Status> predicted) {
  if (truth.size() != predicted.size()) throw Error(ErrorKind::InvalidArgument, "label and prediction counts differ");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], predicted[i]);
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorKind::EmptyMatrix, "confusion matrix is empty");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

std::optional<double> sensitivity(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fn == 0) return std::nullopt;
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
}

double kappa(const ConfusionMatrix& cm) {
  const double n = static_cast<double>(cm.total());
  if (n == 0.0) throw Error(ErrorKind::EmptyMatrix, "confusion matrix is empty");
  const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
  const double fn = static_cast<double>(cm.fn), tn = static_cast<double>(cm.tn);
  const double pa = (tp + tn) / n;
  const double pe = ((tp + fn) * (tp + fp) + (fn + tn) * (fp + tn)) / (n * n);
  if (pe == 1.0) return pa == 1.0 ? 1.0 : 0.0;
  return (pa - pe) / (1.0 - pe);
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "k must be at least 2");
  if (n < k) throw Error(ErrorKind::TrainTooSmall, "fewer rows (" + std::to_string(n) + ") than folds");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(idx);
  std::vector<std::vector<std::size_t>> blocks(k);
  const std::size_t base = n / k, extra = n % k;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    blocks[b].assign(idx.begin() + static_cast<std::ptrdiff_t>(pos), idx.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return blocks;
}

std::vector<std::vector<std::size_t>> stratified_kfold_split(std::span<const Status> labels, std::size_t k,
                                                             std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "k must be at least 2");
  if (labels.size() < k) throw Error(ErrorKind::TrainTooSmall, "fewer rows than folds");
  std::vector<std::size_t> closed, open;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == Status::Closed ? closed : open).push_back(i);
  Rng rng(seed);
  rng.shuffle(closed);
  rng.shuffle(open);
  std::vector<std::vector<std::size_t>> blocks(k);
  std::size_t i = 0;
  for (const auto* group : {&closed, &open}) {
    for (auto r : *group) blocks[i++ % k].push_back(r);
  }
  return blocks;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.n));
  s.min = *std::min_element(values.begin(), values.end());
  return s;
}

void finalize(EvalOutcome& o) {
  std::vector<double> acc, sens, kap;
  double features = 0.0;
  o.undefined_sensitivity_folds = 0;
  for (const auto& f : o.folds) {
    acc.push_back(f.accuracy);
    kap.push_back(f.kappa);
    if (f.sensitivity) {
      sens.push_back(*f.sensitivity);
    } else {
      ++o.undefined_sensitivity_folds;
    }
    features += static_cast<double>(f.n_features);
  }
  o.accuracy = summarize(acc);
  o.kappa = summarize(kap);
  o.sensitivity = sens.empty() ? std::nullopt : std::optional<Summary>(summarize(sens));
  o.mean_features = o.folds.empty() ? 0.0 : features / static_cast<double>(o.folds.size());
}

std::vector<std::vector<std::size_t>> make_folds(const DesignMatrix& matrix, const CvOptions& options,
                                                 std::uint64_t seed) {
  return options.stratified ? stratified_kfold_split(matrix.labels, options.k, seed)
                            : kfold_split(matrix.rows(), options.k, seed);
}

namespace {

std::uint64_t approach_seed(std::uint64_t seed, bool prune) { return mix_seed(seed, prune ? 1 : 0); }
std::uint64_t selection_seed(std::uint64_t fold_seed, std::size_t fold) { return mix_seed(fold_seed, 2 * fold); }
std::uint64_t fit_seed(std::uint64_t model_seed, std::uint64_t fold_seed, std::size_t fold) {
  return mix_seed(model_seed ^ fold_seed, 2 * fold + 1);
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& held_out) {
  std::vector<bool> out(n, false);
  for (auto r : held_out) out[r] = true;
  std::vector<std::size_t> train;
  train.reserve(n - held_out.size());
  for (std::size_t r = 0; r < n; ++r) {
    if (!out[r]) train.push_back(r);
  }
  return train;
}

std::vector<std::size_t> all_columns(const DesignMatrix& m) {
  std::vector<std::size_t> c(m.cols());
  std::iota(c.begin(), c.end(), std::size_t{0});
  return c;
}

/// Fits on the selected training view and scores the held-out rows.
FoldMetrics run_fold(const DesignMatrix& m, const std::vector<std::size_t>& test_rows, const DataView& train,
                     const std::vector<std::string>& selected, const Learner& learner, std::uint64_t seed) {
  const DataView sel = train.select_named(selected);
  const Predictor predict = learner(sel, seed);
  std::vector<std::size_t> cols;
  cols.reserve(selected.size());
  for (const auto& name : selected) cols.push_back(m.column(name));
  ConfusionMatrix cm;
  std::vector<double> row(cols.size());
  for (auto r : test_rows) {
    for (std::size_t c = 0; c < cols.size(); ++c) row[c] = m.at(r, cols[c]);
    cm.add(m.labels[r], predict(row));
  }
  FoldMetrics f;
  f.cm = cm;
  f.accuracy = accuracy(cm);
  f.sensitivity = sensitivity(cm);
  f.kappa = kappa(cm);
  f.n_features = selected.size();
  return f;
}

Learner learner_for(const models::ModelSpec& spec) {
  return [spec](const DataView& train, std::uint64_t seed) -> Predictor {
    models::ModelSpec s = spec;
    s.seed = seed;
    auto model = std::make_shared<models::TrainedModel>(models::fit_model(s, train));
    return [model](std::span<const double> row) { return model->predict(row); };
  };
}

std::string fold_error(std::size_t fold, const std::exception& e) {
  return "fold " + std::to_string(fold + 1) + ": " + e.what();
}

}  // namespace

EvalOutcome cross_validate(const DesignMatrix& matrix, const Learner& learner, const models::ModelSpec& spec,
                           const featsel::SelectionSpec& selection, std::uint64_t seed, const CvOptions& options) {
  EvalOutcome o;
  o.zone_id = matrix.zone_id;
  o.spec = spec;
  o.selection = selection;
  o.fold_seed = approach_seed(seed, selection.prune);
  const auto folds = make_folds(matrix, options, o.fold_seed);
  const auto cols = all_columns(matrix);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (options.observer) options.observer->begin_fold(f, folds[f]);
    DataView train(matrix, complement(matrix.rows(), folds[f]), cols, options.observer);
    try {
      auto rep = featsel::select_features(train, selection, selection_seed(o.fold_seed, f));
      o.folds.push_back(run_fold(matrix, folds[f], train, rep.selected, learner, fit_seed(spec.seed, o.fold_seed, f)));
    } catch (const Error& e) {
      throw Error(e.kind(), fold_error(f, e));
    }
  }
  finalize(o);
  if (o.undefined_sensitivity_folds > 0) {
    std::cerr << "warning: " << matrix.zone_id << " " << spec.describe() << ": " << o.undefined_sensitivity_folds
              << " fold(s) without closures excluded from sensitivity\n";
  }
  return o;
}

EvalOutcome cross_validate(const DesignMatrix& matrix, const models::ModelSpec& spec,
                           const featsel::SelectionSpec& selection, std::uint64_t seed, const CvOptions& options) {
  models::validate(spec);
  return cross_validate(matrix, learner_for(spec), spec, selection, seed, options);
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

std::vector<models::ModelSpec> Grid::model_specs(std::uint64_t seed) const {
  std::vector<models::ModelSpec> out;
  for (int k : knn_k) out.push_back({models::KnnParams{k}, seed});
  for (auto v : nb_variants) out.push_back({models::NaiveBayesParams{v}, seed});
  for (int t : rf_trees) out.push_back({models::RandomForestParams{t}, seed});
  for (const auto& h : mlp_hidden) {
    models::MlpParams p;
    p.hidden_layers = h;
    p.epochs = mlp_epochs;
    out.push_back({p, seed});
  }
  return out;
}

std::vector<featsel::SelectionSpec> Grid::selection_specs() const {
  std::vector<featsel::SelectionSpec> out;
  for (bool p : prune) {
    for (int cq : corr_quartiles) {
      for (int rq : rf_quartiles) {
        featsel::SelectionSpec s;
        s.prune = p;
        s.corr_quartile = cq;
        s.rf_quartile = rq;
        s.threshold = prune_threshold;
        s.rank_forest_trees = rank_forest_trees;
        out.push_back(s);
      }
    }
  }
  return out;
}

Grid desk_grid() {
  Grid g;
  g.rf_trees = {100, 500};
  return g;
}

json to_json(const Grid& g) {
  std::vector<std::string> variants;
  for (auto v : g.nb_variants) variants.emplace_back(models::to_string(v));
  return {{"knn", {{"k", g.knn_k}}},
          {"naive_bayes", {{"variant", variants}}},
          {"random_forest", {{"n_trees", g.rf_trees}}},
          {"mlp", {{"hidden_layers", g.mlp_hidden}, {"epochs", g.mlp_epochs}}},
          {"corr_quartiles", g.corr_quartiles},
          {"rf_quartiles", g.rf_quartiles},
          {"prune", g.prune},
          {"prune_threshold", g.prune_threshold},
          {"rank_forest_trees", g.rank_forest_trees},
          {"folds", g.folds},
          {"stratified", g.stratified},
          {"threads", g.threads}};
}

Grid grid_from_json(const json& j) {
  Grid g;
  // An absent family section removes that family from the grid.
  g.knn_k = j.contains("knn") ? j["knn"].at("k").get<std::vector<int>>() : std::vector<int>{};
  g.nb_variants.clear();
  if (j.contains("naive_bayes")) {
    for (const auto& v : j["naive_bayes"].at("variant")) g.nb_variants.push_back(models::parse_nb_variant(v.get<std::string>()));
  }
  g.rf_trees = j.contains("random_forest") ? j["random_forest"].at("n_trees").get<std::vector<int>>() : std::vector<int>{};
  g.mlp_hidden.clear();
  if (j.contains("mlp")) {
    g.mlp_hidden = j["mlp"].at("hidden_layers").get<std::vector<std::vector<int>>>();
    g.mlp_epochs = j["mlp"].value("epochs", 10);
  }
  if (j.contains("corr_quartiles")) g.corr_quartiles = j["corr_quartiles"].get<std::vector<int>>();
  if (j.contains("rf_quartiles")) g.rf_quartiles = j["rf_quartiles"].get<std::vector<int>>();
  if (j.contains("prune")) g.prune = j["prune"].get<std::vector<bool>>();
  g.prune_threshold = j.value("prune_threshold", featsel::kDefaultPruneThreshold);
  g.rank_forest_trees = j.value("rank_forest_trees", featsel::kDefaultRankForestTrees);
  g.folds = j.value("folds", std::size_t{10});
  g.stratified = j.value("stratified", false);
  g.threads = j.value("threads", 1u);
  for (const auto& spec : g.model_specs(0)) models::validate(spec);
  for (const auto& sel : g.selection_specs()) featsel::validate(sel);
  if (g.model_specs(0).empty() || g.selection_specs().empty()) {
    throw Error(ErrorKind::InvalidArgument, "grid has no cells");
  }
  return g;
}

Grid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open grid '" + path.string() + "'");
  try {
    return grid_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, "invalid grid '" + path.string() + "': " + e.what());
  }
}

bool better(const EvalOutcome& a, const EvalOutcome& b) {
  if (a.sensitivity_mean() != b.sensitivity_mean()) return a.sensitivity_mean() > b.sensitivity_mean();
  if (a.accuracy.mean != b.accuracy.mean) return a.accuracy.mean > b.accuracy.mean;
  if (a.kappa.mean != b.kappa.mean) return a.kappa.mean > b.kappa.mean;
  if (a.mean_features != b.mean_features) return a.mean_features < b.mean_features;
  return a.cell_index < b.cell_index;
}

GridResult grid_search(const DesignMatrix& matrix, const Grid& grid, std::uint64_t seed) {
  return grid_search(matrix, grid, seed, RecorderFactory{});
}

GridResult grid_search(const DesignMatrix& matrix, const Grid& grid, std::uint64_t seed,
                       const RecorderFactory& recorders) {
  const auto sel_specs = grid.selection_specs();
  const auto model_specs = grid.model_specs(seed);
  for (const auto& m : model_specs) models::validate(m);
  CvOptions cv;
  cv.k = grid.folds;
  cv.stratified = grid.stratified;
  const auto cols = all_columns(matrix);

  GridResult result;
  result.zone_id = matrix.zone_id;
  result.seed = seed;
  result.selections.resize(sel_specs.size());

  // Folds and training views per approach.
  struct Approach {
    std::uint64_t fold_seed = 0;
    std::vector<std::vector<std::size_t>> folds;
    std::vector<DataView> train;
  };
  std::vector<Approach> approaches;
  for (bool p : grid.prune) {
    Approach a;
    a.fold_seed = approach_seed(seed, p);
    a.folds = make_folds(matrix, cv, a.fold_seed);
    for (std::size_t f = 0; f < a.folds.size(); ++f) {
      AccessRecorder* rec = recorders ? recorders(p, f, a.folds[f]) : nullptr;
      a.train.emplace_back(matrix, complement(matrix.rows(), a.folds[f]), cols, rec);
    }
    result.fold_seeds.push_back(a.fold_seed);
    approaches.push_back(std::move(a));
  }
  auto approach_of = [&](const featsel::SelectionSpec& s) -> const Approach& {
    auto it = std::find(grid.prune.begin(), grid.prune.end(), s.prune);
    return approaches[static_cast<std::size_t>(it - grid.prune.begin())];
  };

  // Per-fold selections, shared by every model.
  std::vector<std::string> selection_error(sel_specs.size());
  for (std::size_t ai = 0; ai < approaches.size(); ++ai) {
    const auto& a = approaches[ai];
    for (std::size_t f = 0; f < a.folds.size(); ++f) {
      featsel::SelectionPlanner planner(a.train[f], selection_seed(a.fold_seed, f));
      for (std::size_t s = 0; s < sel_specs.size(); ++s) {
        if (sel_specs[s].prune != grid.prune[ai] || !selection_error[s].empty()) continue;
        try {
          result.selections[s].push_back(planner.select(sel_specs[s]).selected);
        } catch (const std::exception& e) {
          selection_error[s] = fold_error(f, e);
        }
      }
    }
  }

  const std::size_t n_cells = sel_specs.size() * model_specs.size();
  std::vector<EvalOutcome> outcomes(n_cells);
  std::vector<Learner> learners;
  for (const auto& m : model_specs) learners.push_back(learner_for(m));

  auto run_cell = [&](std::size_t cell) {
    const std::size_t s = cell / model_specs.size();
    const std::size_t mi = cell % model_specs.size();
    const auto& a = approach_of(sel_specs[s]);
    EvalOutcome& o = outcomes[cell];
    o.zone_id = matrix.zone_id;
    o.spec = model_specs[mi];
    o.selection = sel_specs[s];
    o.fold_seed = a.fold_seed;
    o.cell_index = cell;
    if (!selection_error[s].empty()) {
      o.error = selection_error[s];
      return;
    }
    for (std::size_t f = 0; f < a.folds.size(); ++f) {
      try {
        o.folds.push_back(run_fold(matrix, a.folds[f], a.train[f], result.selections[s][f], learners[mi],
                                   fit_seed(o.spec.seed, a.fold_seed, f)));
      } catch (const std::exception& e) {
        o.error = fold_error(f, e);
        o.folds.clear();
        return;
      }
    }
    finalize(o);
  };

  const unsigned threads = std::max(1u, grid.threads);
  if (threads == 1) {
    for (std::size_t c = 0; c < n_cells; ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < n_cells; c = next++) run_cell(c);
      });
    }
  }

  std::size_t undefined = 0;
  std::vector<EvalOutcome> failed;
  for (auto& o : outcomes) {
    if (o.error) {
      failed.push_back(std::move(o));
    } else {
      undefined += o.undefined_sensitivity_folds;
      result.ranked.push_back(std::move(o));
    }
  }
  std::stable_sort(result.ranked.begin(), result.ranked.end(), better);
  for (auto& o : failed) result.ranked.push_back(std::move(o));
  if (undefined > 0) {
    std::cerr << "warning: " << matrix.zone_id << ": " << undefined
              << " cell-fold(s) without closures excluded from sensitivity means\n";
  }
  return result;
}

const EvalOutcome& select_best(const std::vector<EvalOutcome>& outcomes) {
  const EvalOutcome* best = nullptr;
  for (const auto& o : outcomes) {
    if (o.error) continue;
    if (!best || better(o, *best)) best = &o;
  }
  if (!best) throw Error(ErrorKind::InvalidArgument, "no successful outcome to select from");
  return *best;
}

std::vector<EvalOutcome> best_per_family(const std::vector<EvalOutcome>& outcomes) {
  std::vector<EvalOutcome> out;
  for (auto fam : {models::Family::Knn, models::Family::NaiveBayes, models::Family::RandomForest, models::Family::Mlp}) {
    std::vector<EvalOutcome> of;
    for (const auto& o : outcomes) {
      if (!o.error && o.spec.family() == fam) of.push_back(o);
    }
    if (!of.empty()) out.push_back(select_best(of));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

json summary_json(const Summary& s) { return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"n", s.n}}; }
Summary summary_from(const json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>(), j.at("min").get<double>(), j.at("n").get<std::size_t>()};
}

}  // namespace

json to_json(const EvalOutcome& o) {
  json folds = json::array();
  for (const auto& f : o.folds) {
    folds.push_back({{"tp", f.cm.tp},
                     {"fp", f.cm.fp},
                     {"fn", f.cm.fn},
                     {"tn", f.cm.tn},
                     {"accuracy", f.accuracy},
                     {"sensitivity", f.sensitivity ? json(*f.sensitivity) : json(nullptr)},
                     {"kappa", f.kappa},
                     {"n_features", f.n_features}});
  }
  json j{{"zone_id", o.zone_id},
         {"spec", models::spec_to_json(o.spec)},
         {"selection", featsel::to_json(o.selection)},
         {"fold_seed", o.fold_seed},
         {"cell_index", o.cell_index},
         {"folds", folds}};
  if (o.error) {
    j["error"] = *o.error;
    return j;
  }
  j["accuracy"] = summary_json(o.accuracy);
  j["sensitivity"] = o.sensitivity ? summary_json(*o.sensitivity) : json(nullptr);
  j["kappa"] = summary_json(o.kappa);
  j["mean_features"] = o.mean_features;
  j["undefined_sensitivity_folds"] = o.undefined_sensitivity_folds;
  return j;
}

EvalOutcome outcome_from_json(const json& j) {
  EvalOutcome o;
  o.zone_id = j.at("zone_id").get<std::string>();
  o.spec = models::spec_from_json(j.at("spec"));
  o.selection = featsel::selection_spec_from_json(j.at("selection"));
  o.fold_seed = j.at("fold_seed").get<std::uint64_t>();
  o.cell_index = j.at("cell_index").get<std::size_t>();
  for (const auto& f : j.at("folds")) {
    FoldMetrics m;
    m.cm = {f.at("tp").get<std::size_t>(), f.at("fp").get<std::size_t>(), f.at("fn").get<std::size_t>(),
            f.at("tn").get<std::size_t>()};
    m.accuracy = f.at("accuracy").get<double>();
    if (!f.at("sensitivity").is_null()) m.sensitivity = f.at("sensitivity").get<double>();
    m.kappa = f.at("kappa").get<double>();
    m.n_features = f.at("n_features").get<std::size_t>();
    o.folds.push_back(m);
  }
  if (j.contains("error")) {
    o.error = j["error"].get<std::string>();
    return o;
  }
  o.accuracy = summary_from(j.at("accuracy"));
  if (!j.at("sensitivity").is_null()) o.sensitivity = summary_from(j["sensitivity"]);
  o.kappa = summary_from(j.at("kappa"));
  o.mean_features = j.at("mean_features").get<double>();
  o.undefined_sensitivity_folds = j.value("undefined_sensitivity_folds", std::size_t{0});
  return o;
}

json to_json(const GridResult& r) {
  json outcomes = json::array();
  for (const auto& o : r.ranked) outcomes.push_back(to_json(o));
  return {{"zone_id", r.zone_id},
          {"seed", r.seed},
          {"fold_seeds", r.fold_seeds},
          {"outcomes", outcomes},
          {"selections", r.selections}};
}

GridResult grid_result_from_json(const json& j) {
  GridResult r;
  r.zone_id = j.at("zone_id").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.fold_seeds = j.at("fold_seeds").get<std::vector<std::uint64_t>>();
  for (const auto& o : j.at("outcomes")) r.ranked.push_back(outcome_from_json(o));
  if (j.contains("selections")) r.selections = j["selections"].get<std::vector<std::vector<std::vector<std::string>>>>();
  return r;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

std::string quartile_cell(int q) { return q >= 100 ? "-" : std::to_string(q); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << std::fixed << v;
  return s.str();
}

}  // namespace

std::string table_csv(const std::vector<EvalOutcome>& rows) {
  std::ostringstream out;
  out << "zone,prune,corr_quartile,rf_quartile,algorithm,params,recall_mean,recall_std,recall_min,"
         "accuracy_mean,accuracy_std,accuracy_min,kappa_mean,kappa_std,kappa_min,n_features\n";
  for (const auto& o : rows) {
    if (o.error) continue;
    const Summary sens = o.sensitivity.value_or(Summary{});
    out << o.zone_id << ',' << (o.selection.prune ? "on" : "off") << ',' << quartile_cell(o.selection.corr_quartile)
        << ',' << quartile_cell(o.selection.rf_quartile) << ',' << models::to_string(o.spec.family()) << ','
        << o.spec.describe() << ',' << (o.sensitivity ? fmt(sens.mean) : "NA") << ','
        << (o.sensitivity ? fmt(sens.std) : "NA") << ',' << (o.sensitivity ? fmt(sens.min) : "NA") << ','
        << fmt(o.accuracy.mean) << ',' << fmt(o.accuracy.std) << ',' << fmt(o.accuracy.min) << ','
        << fmt(o.kappa.mean) << ',' << fmt(o.kappa.std) << ',' << fmt(o.kappa.min) << ',' << fmt(o.mean_features)
        << '\n';
  }
  return out.str();
}

void write_table_csv(const std::filesystem::path& path, const std::vector<EvalOutcome>& rows) {
  write_text(path, table_csv(rows));
}

Persistence persistence(const std::vector<GridResult>& results, const Grid& grid,
                        const std::vector<std::string>& feature_order) {
  const auto sel_specs = grid.selection_specs();
  Persistence p;
  p.features = feature_order;
  for (const auto& r : results) p.zones.push_back(r.zone_id);
  p.frequency.assign(p.features.size(), std::vector<double>(results.size(), 0.0));
  for (std::size_t z = 0; z < results.size(); ++z) {
    const auto& r = results[z];
    if (r.selections.size() != sel_specs.size()) {
      throw Error(ErrorKind::InvalidArgument, "selection record of " + r.zone_id + " does not match the grid");
    }
    std::size_t draws = 0;
    std::vector<std::size_t> counts(p.features.size(), 0);
    for (std::size_t s = 0; s < sel_specs.size(); ++s) {
      if (sel_specs[s].corr_quartile >= 100 && sel_specs[s].rf_quartile >= 100) continue;
      for (const auto& fold : r.selections[s]) {
        ++draws;
        for (const auto& name : fold) {
          auto it = std::find(p.features.begin(), p.features.end(), name);
          if (it != p.features.end()) ++counts[static_cast<std::size_t>(it - p.features.begin())];
        }
      }
    }
    for (std::size_t f = 0; f < p.features.size(); ++f) {
      p.frequency[f][z] = draws ? static_cast<double>(counts[f]) / static_cast<double>(draws) : 0.0;
    }
  }
  return p;
}

std::string persistence_csv(const Persistence& p) {
  std::ostringstream out;
  out << "feature";
  for (const auto& z : p.zones) out << ',' << z;
  out << '\n';
  for (std::size_t f = 0; f < p.features.size(); ++f) {
    out << p.features[f];
    for (double v : p.frequency[f]) out << ',' << fmt(v);
    out << '\n';
  }
  return out.str();
}

void write_persistence_csv(const std::filesystem::path& path, const Persistence& p) {
  write_text(path, persistence_csv(p));
}

}  // namespace habgate::eval
