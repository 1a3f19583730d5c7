#include "habgate/featsel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "habgate/models/random_forest.hpp"

namespace habgate::featsel {

using nlohmann::json;

std::string_view to_string(RankMethod m) {
  return m == RankMethod::CorrelationFilter ? "correlation" : "rf_importance";
}

std::vector<std::string> FeatureRanking::names() const {
  std::vector<std::string> out;
  out.reserve(ordered.size());
  for (const auto& [name, score] : ordered) out.push_back(name);
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n == 0 || b.size() != n) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

namespace {

std::vector<std::vector<double>> columns_of(const DataView& view) {
  std::vector<std::vector<double>> cols(view.cols(), std::vector<double>(view.rows()));
  for (std::size_t r = 0; r < view.rows(); ++r) {
    for (std::size_t c = 0; c < view.cols(); ++c) cols[c][r] = view.at(r, c);
  }
  return cols;
}

void sort_ranking(FeatureRanking& ranking) {
  std::stable_sort(ranking.ordered.begin(), ranking.ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
}

}  // namespace

PruneResult prune_correlated(const DataView& view, double threshold) {
  const auto cols = columns_of(view);
  PruneResult out;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    double worst = -1.0;
    std::size_t partner = 0;
    for (std::size_t k : out.kept) {
      const double r = std::abs(pearson(cols[k], cols[j]));
      if (r > worst) {
        worst = r;
        partner = k;
      }
    }
    if (worst > threshold) {
      out.pairs.push_back({view.name(partner), view.name(j), worst});
    } else {
      out.kept.push_back(j);
    }
  }
  return out;
}

DesignMatrix prune_correlated(const DesignMatrix& m, std::vector<PrunedPair>& pairs, double threshold) {
  DataView view(m);
  auto res = prune_correlated(view, threshold);
  pairs = res.pairs;
  DesignMatrix out;
  out.zone_id = m.zone_id;
  for (auto c : res.kept) out.feature_names.push_back(m.feature_names[c]);
  out.weeks = m.weeks;
  out.labels = m.labels;
  out.values.reserve(m.rows() * res.kept.size());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (auto c : res.kept) out.values.push_back(m.at(r, c));
  }
  return out;
}

FeatureRanking rank_by_target_correlation(const DataView& view) {
  const auto cols = columns_of(view);
  const auto y = view.labels01();
  FeatureRanking ranking{RankMethod::CorrelationFilter, {}};
  for (std::size_t c = 0; c < cols.size(); ++c) ranking.ordered.emplace_back(view.name(c), std::abs(pearson(cols[c], y)));
  sort_ranking(ranking);
  return ranking;
}

FeatureRanking rank_by_rf_importance(const DataView& view, int n_trees, std::uint64_t seed) {
  if (view.rows() == 0) throw Error(ErrorKind::EmptyMatrix, "cannot rank features of an empty matrix");
  models::ForestOptions options;
  options.n_trees = n_trees;
  const auto forest = models::fit_forest(materialize(view), materialize_labels(view), options, seed);
  FeatureRanking ranking{RankMethod::RandomForestEmbedded, {}};
  for (std::size_t c = 0; c < view.cols(); ++c) ranking.ordered.emplace_back(view.name(c), forest.importance[c]);
  sort_ranking(ranking);
  return ranking;
}

std::size_t quartile_count(std::size_t n, int pct) {
  if (pct <= 0 || pct > 100) throw Error(ErrorKind::InvalidArgument, "quartile percentage must be in (0, 100]");
  // Integer ceil(pct * n / 100).
  return (static_cast<std::size_t>(pct) * n + 99) / 100;
}

std::vector<std::string> take_quartile(const FeatureRanking& ranking, int pct) {
  auto names = ranking.names();
  names.resize(quartile_count(names.size(), pct));
  return names;
}

void validate(const SelectionSpec& spec) {
  for (int q : {spec.corr_quartile, spec.rf_quartile}) {
    if (q != 25 && q != 50 && q != 75 && q != 100) {
      throw Error(ErrorKind::InvalidArgument, "quartile must be one of 25, 50, 75, 100");
    }
  }
  if (!(spec.threshold > 0.0 && spec.threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "prune threshold must be in (0, 1]");
  }
  if (spec.rank_forest_trees < 1) throw Error(ErrorKind::InvalidArgument, "rank forest needs at least one tree");
}

SelectionReport select_features(const DataView& view, const SelectionSpec& spec, std::uint64_t seed) {
  return SelectionPlanner(view, seed).select(spec);
}

SelectionPlanner::Pruned& SelectionPlanner::pruned(bool prune, double threshold) {
  auto key = std::make_pair(prune, prune ? threshold : 0.0);
  auto it = pruned_.find(key);
  if (it != pruned_.end()) return it->second;
  Pruned p;
  if (prune) {
    auto pr = prune_correlated(view_, threshold);
    p.pairs = std::move(pr.pairs);
    p.kept = std::move(pr.kept);
  } else {
    p.kept.resize(view_.cols());
    std::iota(p.kept.begin(), p.kept.end(), std::size_t{0});
  }
  return pruned_.emplace(key, std::move(p)).first->second;
}

SelectionReport SelectionPlanner::select(const SelectionSpec& spec) {
  validate(spec);
  SelectionReport rep;
  rep.zone_id = view_.parent().zone_id;
  rep.spec = spec;
  rep.seed = seed_;
  rep.n_input = view_.cols();

  auto& base = pruned(spec.prune, spec.threshold);
  DataView current = view_.select_columns(base.kept);
  if (spec.prune) {
    rep.pruned_pairs = base.pairs;
    rep.subsets["pruned"] = current.names();
  }
  if (spec.corr_quartile < 100) {
    if (!base.ranked) {
      base.correlation = rank_by_target_correlation(current);
      base.ranked = true;
    }
    rep.correlation = base.correlation;
    auto keep = take_quartile(rep.correlation, spec.corr_quartile);
    rep.subsets["corr" + std::to_string(spec.corr_quartile)] = keep;
    current = current.select_named(keep);
  }
  if (spec.rf_quartile < 100) {
    auto key = std::make_tuple(spec.prune, spec.prune ? spec.threshold : 0.0, spec.corr_quartile,
                               spec.rank_forest_trees);
    auto it = importance_.find(key);
    if (it == importance_.end()) {
      it = importance_.emplace(key, rank_by_rf_importance(current, spec.rank_forest_trees, seed_)).first;
    }
    rep.importance = it->second;
    auto keep = take_quartile(rep.importance, spec.rf_quartile);
    rep.subsets["rf" + std::to_string(spec.rf_quartile)] = keep;
    current = current.select_named(keep);
  }
  rep.selected = current.names();
  return rep;
}

json to_json(const FeatureRanking& r) {
  json entries = json::array();
  for (const auto& [name, score] : r.ordered) entries.push_back({{"feature", name}, {"score", score}});
  return {{"method", to_string(r.method)}, {"ordered", entries}};
}

json to_json(const SelectionSpec& s) {
  return {{"prune", s.prune},
          {"corr_quartile", s.corr_quartile},
          {"rf_quartile", s.rf_quartile},
          {"threshold", s.threshold},
          {"rank_forest_trees", s.rank_forest_trees}};
}

SelectionSpec selection_spec_from_json(const json& j) {
  SelectionSpec s;
  s.prune = j.value("prune", false);
  s.corr_quartile = j.value("corr_quartile", 100);
  s.rf_quartile = j.value("rf_quartile", 100);
  s.threshold = j.value("threshold", kDefaultPruneThreshold);
  s.rank_forest_trees = j.value("rank_forest_trees", kDefaultRankForestTrees);
  validate(s);
  return s;
}

json to_json(const SelectionReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pruned_pairs) pairs.push_back({{"kept", p.kept}, {"dropped", p.dropped}, {"abs_r", p.abs_r}});
  json j{{"zone_id", r.zone_id},      {"spec", to_json(r.spec)},  {"seed", r.seed},
         {"n_input", r.n_input},      {"pruned_pairs", pairs},    {"subsets", r.subsets},
         {"selected", r.selected}};
  if (!r.correlation.ordered.empty()) j["correlation_ranking"] = to_json(r.correlation);
  if (!r.importance.ordered.empty()) j["importance_ranking"] = to_json(r.importance);
  return j;
}

}  // namespace habgate::featsel
