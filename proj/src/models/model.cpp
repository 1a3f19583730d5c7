#include "habgate/models/model.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

namespace habgate::models {

using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Knn: return "knn";
    case Family::NaiveBayes: return "nb";
    case Family::RandomForest: return "rf";
    case Family::Mlp: return "mlp";
  }
  return "knn";
}

Family parse_family(std::string_view s) {
  for (auto f : {Family::Knn, Family::NaiveBayes, Family::RandomForest, Family::Mlp}) {
    if (to_string(f) == s) return f;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown model family '" + std::string(s) + "'");
}

std::string ModelSpec::describe() const {
  return std::visit(Overloaded{
                        [](const KnnParams& p) { return "k=" + std::to_string(p.k); },
                        [](const NaiveBayesParams& p) { return std::string(to_string(p.variant)); },
                        [](const RandomForestParams& p) { return "trees=" + std::to_string(p.n_trees); },
                        [](const MlpParams& p) {
                          std::string s = "hidden=";
                          for (std::size_t i = 0; i < p.hidden_layers.size(); ++i) {
                            if (i) s += '-';
                            s += std::to_string(p.hidden_layers[i]);
                          }
                          return s;
                        },
                    },
                    params);
}

const std::vector<int>& knn_grid() {
  static const std::vector<int> g{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return g;
}
const std::vector<NbVariant>& nb_grid() {
  static const std::vector<NbVariant> g{NbVariant::Gaussian, NbVariant::Multinomial, NbVariant::Complement,
                                        NbVariant::Bernoulli};
  return g;
}
const std::vector<int>& forest_grid() {
  static const std::vector<int> g{100, 500, 1000, 1500, 2000};
  return g;
}
const std::vector<std::vector<int>>& mlp_grid() {
  static const std::vector<std::vector<int>> g{{2}, {8}, {14}, {10, 10}, {10, 20}};
  return g;
}

void validate(const ModelSpec& spec) {
  std::visit(Overloaded{
                 [](const KnnParams& p) {
                   if (p.k < 1 || p.k > 10) throw Error(ErrorKind::InvalidArgument, "k must be in 1..10");
                 },
                 [](const NaiveBayesParams&) {},
                 [](const RandomForestParams& p) {
                   const auto& g = forest_grid();
                   if (std::find(g.begin(), g.end(), p.n_trees) == g.end()) {
                     throw Error(ErrorKind::InvalidArgument, "n_trees must be one of 100, 500, 1000, 1500, 2000");
                   }
                 },
                 [](const MlpParams& p) {
                   const auto& g = mlp_grid();
                   if (std::find(g.begin(), g.end(), p.hidden_layers) == g.end()) {
                     throw Error(ErrorKind::InvalidArgument,
                                 "hidden layers must be one of [2], [8], [14], [10,10], [10,20]");
                   }
                   if (p.epochs < 1 || p.batch_size < 1 || !(p.learning_rate > 0.0)) {
                     throw Error(ErrorKind::InvalidArgument, "invalid MLP training schedule");
                   }
                 },
             },
             spec.params);
}

// ---------------------------------------------------------------------------
// Fit / predict
// ---------------------------------------------------------------------------

TrainedModel fit_model(const ModelSpec& spec, const DataView& train) {
  validate(spec);
  TrainedModel m;
  m.spec = spec;
  m.feature_names = train.names();
  Dense x = materialize(train);
  auto y = materialize_labels(train);
  m.scaler = preprocess::minmax_fit(x);
  preprocess::minmax_apply(m.scaler, x);

  m.state = std::visit(
      Overloaded{
          [&](const KnnParams& p) -> FittedState { return knn_fit(std::move(x), std::move(y), p.k); },
          [&](const NaiveBayesParams& p) -> FittedState { return nb_fit(x, y, p.variant); },
          [&](const RandomForestParams& p) -> FittedState {
            ForestOptions opt;
            opt.n_trees = p.n_trees;
            return fit_forest(x, y, opt, spec.seed);
          },
          [&](const MlpParams& p) -> FittedState {
            MlpTraining t;
            t.epochs = p.epochs;
            t.batch_size = p.batch_size;
            t.learning_rate = p.learning_rate;
            t.class_weighting = p.class_weighting;
            return mlp_fit(x, y, p.hidden_layers, t, spec.seed);
          },
      },
      spec.params);
  return m;
}

Status TrainedModel::predict_scaled(std::span<const double> row) const {
  return std::visit([&](const auto& s) { return s.predict(row); }, state);
}

Status TrainedModel::predict(std::span<const double> raw_row) const {
  if (raw_row.size() != feature_names.size()) {
    throw Error(ErrorKind::FeatureMismatch, "expected " + std::to_string(feature_names.size()) + " features, got " +
                                                std::to_string(raw_row.size()));
  }
  auto scaled = preprocess::minmax_apply(scaler, raw_row);
  return predict_scaled(scaled);
}

Prediction TrainedModel::explain(std::span<const double> raw_row) const {
  if (raw_row.size() != feature_names.size()) {
    throw Error(ErrorKind::FeatureMismatch, "expected " + std::to_string(feature_names.size()) + " features, got " +
                                                std::to_string(raw_row.size()));
  }
  auto row = preprocess::minmax_apply(scaler, raw_row);
  Prediction p;
  std::visit(Overloaded{
                 [&](const KnnModel& s) {
                   p.neighbors = s.neighbors(row);
                   p.label = s.predict(row);
                 },
                 [&](const NaiveBayesModel& s) {
                   auto contrib = s.contributions(row);
                   for (std::size_t j = 0; j < contrib.size(); ++j) {
                     p.contributions.push_back({feature_names[j], contrib[j][0], contrib[j][1]});
                   }
                   p.log_prior = s.log_prior;
                   p.label = s.predict(row);
                 },
                 [&](const ForestModel& s) {
                   p.votes = s.votes(row);
                   p.label = p.votes.closed >= p.votes.open ? Status::Closed : Status::Open;
                 },
                 [&](const MlpModel& s) {
                   p.probability_closed = s.probability(row);
                   p.label = *p.probability_closed >= 0.5 ? Status::Closed : Status::Open;
                 },
             },
             state);
  return p;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

json spec_to_json(const ModelSpec& spec) {
  json j{{"family", to_string(spec.family())}, {"seed", spec.seed}};
  std::visit(Overloaded{
                 [&](const KnnParams& p) { j["params"] = {{"k", p.k}, {"metric", "euclidean"}}; },
                 [&](const NaiveBayesParams& p) { j["params"] = {{"variant", to_string(p.variant)}}; },
                 [&](const RandomForestParams& p) {
                   j["params"] = {{"n_trees", p.n_trees}, {"max_features", "sqrt"}, {"bootstrap", true}};
                 },
                 [&](const MlpParams& p) {
                   j["params"] = {{"hidden_layers", p.hidden_layers}, {"epochs", p.epochs},
                                  {"batch_size", p.batch_size},       {"learning_rate", p.learning_rate},
                                  {"class_weighting", p.class_weighting}, {"optimizer", "adam"},
                                  {"loss", "binary_crossentropy"}};
                 },
             },
             spec.params);
  return j;
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.seed = j.value("seed", std::uint64_t{0});
  const auto& p = j.at("params");
  switch (parse_family(j.at("family").get<std::string>())) {
    case Family::Knn: s.params = KnnParams{p.at("k").get<int>()}; break;
    case Family::NaiveBayes: s.params = NaiveBayesParams{parse_nb_variant(p.at("variant").get<std::string>())}; break;
    case Family::RandomForest: s.params = RandomForestParams{p.at("n_trees").get<int>()}; break;
    case Family::Mlp: {
      MlpParams m;
      m.hidden_layers = p.at("hidden_layers").get<std::vector<int>>();
      m.epochs = p.value("epochs", 10);
      m.batch_size = p.value("batch_size", 5);
      m.learning_rate = p.value("learning_rate", 0.001);
      m.class_weighting = p.value("class_weighting", true);
      s.params = m;
      break;
    }
  }
  return s;
}

namespace {

std::string status_token(Status s) { return std::string(to_string(s)); }
Status status_from(const std::string& s) {
  if (s == "CLOSED") return Status::Closed;
  if (s == "OPEN") return Status::Open;
  throw Error(ErrorKind::InvalidArgument, "bad status token '" + s + "'");
}

json dense_to_json(const Dense& d) { return {{"rows", d.n_rows}, {"cols", d.n_cols}, {"data", d.data}}; }
Dense dense_from_json(const json& j) {
  Dense d;
  d.n_rows = j.at("rows").get<std::size_t>();
  d.n_cols = j.at("cols").get<std::size_t>();
  d.data = j.at("data").get<std::vector<double>>();
  if (d.data.size() != d.n_rows * d.n_cols) throw Error(ErrorKind::Io, "dense block size mismatch");
  return d;
}

json state_to_json(const FittedState& state) {
  return std::visit(
      Overloaded{
          [](const KnnModel& s) {
            std::vector<std::string> labels;
            for (auto l : s.labels) labels.push_back(status_token(l));
            return json{{"k", s.k}, {"train", dense_to_json(s.train)}, {"labels", labels}};
          },
          [](const NaiveBayesModel& s) {
            return json{{"variant", to_string(s.variant)}, {"n_features", s.n_features},
                        {"log_prior", s.log_prior},        {"mean", s.mean},
                        {"var", s.var},                    {"log_prob", s.log_prob},
                        {"log_neg_prob", s.log_neg_prob}};
          },
          [](const ForestModel& s) {
            json trees = json::array();
            for (const auto& t : s.trees) {
              json nodes = json::array();
              for (const auto& n : t.nodes) {
                nodes.push_back({n.feature, n.threshold, n.left, n.right, n.n_open, n.n_closed});
              }
              trees.push_back(std::move(nodes));
            }
            return json{{"n_features", s.n_features}, {"importance", s.importance}, {"trees", trees}};
          },
          [](const MlpModel& s) {
            json layers = json::array();
            for (const auto& L : s.layers) {
              layers.push_back({{"n_in", L.n_in}, {"n_out", L.n_out}, {"weights", L.weights}, {"bias", L.bias}});
            }
            return json{{"layers", layers}};
          },
      },
      state);
}

// Non-finite log priors (an absent class) are stored as null.
std::array<double, 2> read_prior(const json& j) {
  std::array<double, 2> out{};
  for (int c = 0; c < 2; ++c) {
    out[c] = j.at(c).is_null() ? -std::numeric_limits<double>::infinity() : j.at(c).get<double>();
  }
  return out;
}

FittedState state_from_json(Family family, const json& j) {
  switch (family) {
    case Family::Knn: {
      KnnModel m;
      m.k = j.at("k").get<int>();
      m.train = dense_from_json(j.at("train"));
      for (const auto& l : j.at("labels")) m.labels.push_back(status_from(l.get<std::string>()));
      return m;
    }
    case Family::NaiveBayes: {
      NaiveBayesModel m;
      m.variant = parse_nb_variant(j.at("variant").get<std::string>());
      m.n_features = j.at("n_features").get<std::size_t>();
      m.log_prior = read_prior(j.at("log_prior"));
      j.at("mean").get_to(m.mean);
      j.at("var").get_to(m.var);
      j.at("log_prob").get_to(m.log_prob);
      j.at("log_neg_prob").get_to(m.log_neg_prob);
      return m;
    }
    case Family::RandomForest: {
      ForestModel m;
      m.n_features = j.at("n_features").get<std::size_t>();
      m.importance = j.at("importance").get<std::vector<double>>();
      for (const auto& t : j.at("trees")) {
        DecisionTree tree;
        for (const auto& n : t) {
          tree.nodes.push_back(TreeNode{n.at(0).get<std::int32_t>(), n.at(1).get<double>(), n.at(2).get<std::int32_t>(),
                                        n.at(3).get<std::int32_t>(), n.at(4).get<std::uint32_t>(),
                                        n.at(5).get<std::uint32_t>()});
        }
        m.trees.push_back(std::move(tree));
      }
      return m;
    }
    case Family::Mlp: {
      MlpModel m;
      for (const auto& L : j.at("layers")) {
        m.layers.push_back(DenseLayer{L.at("n_in").get<std::size_t>(), L.at("n_out").get<std::size_t>(),
                                      L.at("weights").get<std::vector<double>>(),
                                      L.at("bias").get<std::vector<double>>()});
      }
      return m;
    }
  }
  throw Error(ErrorKind::Internal, "unreachable family");
}

}  // namespace

json to_json(const TrainedModel& model) {
  return json{{"format", "habgate-model"},
              {"version", kModelFormatVersion},
              {"spec", spec_to_json(model.spec)},
              {"feature_names", model.feature_names},
              {"scaler", {{"min", model.scaler.min}, {"max", model.scaler.max}}},
              {"state", state_to_json(model.state)}};
}

TrainedModel model_from_json(const json& j) {
  if (j.value("format", "") != "habgate-model") throw Error(ErrorKind::Io, "not a habgate model document");
  if (j.value("version", 0) != kModelFormatVersion) {
    throw Error(ErrorKind::Io, "unsupported model version " + std::to_string(j.value("version", 0)));
  }
  TrainedModel m;
  m.spec = spec_from_json(j.at("spec"));
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.scaler.min = j.at("scaler").at("min").get<std::vector<double>>();
  m.scaler.max = j.at("scaler").at("max").get<std::vector<double>>();
  m.state = state_from_json(m.spec.family(), j.at("state"));
  if (m.scaler.size() != m.feature_names.size()) throw Error(ErrorKind::Io, "scaler arity mismatch in model file");
  return m;
}

json to_json(const Prediction& p) {
  json j{{"label", status_token(p.label)}};
  if (!p.neighbors.empty()) {
    json nn = json::array();
    for (const auto& n : p.neighbors) {
      nn.push_back({{"index", n.index}, {"distance", n.distance}, {"label", status_token(n.label)}});
    }
    j["neighbors"] = nn;
  }
  if (p.votes.open + p.votes.closed > 0) j["votes"] = {{"open", p.votes.open}, {"closed", p.votes.closed}};
  if (p.probability_closed) j["probability_closed"] = *p.probability_closed;
  if (!p.contributions.empty()) {
    json c = json::array();
    for (const auto& f : p.contributions) c.push_back({{"feature", f.feature}, {"open", f.open}, {"closed", f.closed}});
    j["log_likelihood"] = c;
    j["log_prior"] = p.log_prior;
  }
  return j;
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << to_json(model).dump() << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, "invalid model JSON '" + path.string() + "': " + e.what());
  }
  return model_from_json(j);
}

}  // namespace habgate::models
