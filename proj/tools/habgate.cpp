// habgate command-line entry point.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "habgate/config.hpp"
#include "habgate/eval.hpp"
#include "habgate/featsel.hpp"
#include "habgate/ingest.hpp"
#include "habgate/pipeline.hpp"
#include "habgate/preprocess.hpp"
#include "habgate/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace habgate;

namespace {

enum Exit : int { kOk = 0, kFindings = 1, kIo = 2, kInternal = 3 };

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return kIo;
    case ErrorKind::Internal: return kInternal;
    default: return kFindings;
  }
}

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

KeyValues load_config(const Globals& g) {
  KeyValues kv = g.config.empty() ? KeyValues{} : KeyValues::load(g.config);
  if (g.seed) kv.set("seed", std::to_string(*g.seed));
  return kv;
}

fs::path config_dir(const Globals& g) { return g.config.empty() ? fs::path{} : fs::path(g.config).parent_path(); }

std::uint64_t seed_of(const Globals& g) { return load_config(g).get_u64("seed", 1); }

fs::path require_out(const Globals& g, const char* what) {
  if (g.out.empty()) throw Error(ErrorKind::InvalidArgument, std::string("--out is required: ") + what);
  return g.out;
}

void write_json(const Globals& g, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (g.out.empty() || g.out == "-") {
    std::cout << text;
  } else {
    if (fs::path(g.out).has_parent_path()) fs::create_directories(fs::path(g.out).parent_path());
    write_text(g.out, text);
  }
}

bool parse_switch(const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw Error(ErrorKind::InvalidArgument, "expected on|off, got '" + v + "'");
}

std::vector<int> parse_hidden(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '-')) {
    int v = 0;
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || p != part.data() + part.size()) {
      throw Error(ErrorKind::InvalidArgument, "hidden layers must look like 10-20, got '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

/// Accepts a grid result, an array of outcomes or an array of grid results.
std::vector<eval::EvalOutcome> read_outcomes(const std::vector<std::string>& paths,
                                             std::vector<eval::GridResult>* grids = nullptr) {
  std::vector<eval::EvalOutcome> all;
  for (const auto& p : paths) {
    const json j = json::parse(read_text(p));
    auto take_grid = [&](const json& g) {
      auto r = eval::grid_result_from_json(g);
      all.insert(all.end(), r.ranked.begin(), r.ranked.end());
      if (grids) grids->push_back(std::move(r));
    };
    if (j.is_object()) {
      take_grid(j);
    } else if (j.is_array()) {
      for (const auto& e : j) {
        if (e.contains("ranked")) {
          take_grid(e);
        } else {
          all.push_back(eval::outcome_from_json(e));
        }
      }
    } else {
      throw Error(ErrorKind::InvalidArgument, "'" + p + "' holds neither outcomes nor a grid result");
    }
  }
  return all;
}

struct SelectionFlags {
  std::string prune = "off";
  int corr = 100;
  int rf = 100;
  double threshold = featsel::kDefaultPruneThreshold;
  std::string method;
  std::optional<int> quartile;

  void add(CLI::App* cmd) {
    cmd->add_option("--prune", prune, "Drop one of each feature pair with |r| > threshold (on|off)");
    cmd->add_option("--corr-quartile", corr, "Keep this percentage of features by target correlation");
    cmd->add_option("--rf-quartile", rf, "Then keep this percentage by forest importance");
    cmd->add_option("--threshold,--prune-threshold", threshold, "Pruning threshold on |r|");
    cmd->add_option("--method", method, "corr | rf | both: apply --quartile to these rankers");
    cmd->add_option("--quartile", quartile, "Quartile for --method");
  }
  featsel::SelectionSpec spec() const {
    featsel::SelectionSpec s;
    s.prune = parse_switch(prune);
    s.corr_quartile = corr;
    s.rf_quartile = rf;
    if (quartile) {
      if (method == "corr" || method == "both") s.corr_quartile = *quartile;
      if (method == "rf" || method == "both") s.rf_quartile = *quartile;
      if (method != "corr" && method != "rf" && method != "both") {
        throw Error(ErrorKind::InvalidArgument, "--quartile needs --method corr|rf|both");
      }
    }
    s.threshold = threshold;
    featsel::validate(s);
    return s;
  }
};

struct RowTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> weeks;
};

RowTable read_rows(const fs::path& path) {
  std::istringstream in(read_text(path));
  RowTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw Error(ErrorKind::FeatureMismatch, "'" + path.string() + "' has no header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line);
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) throw MalformedRow(ln, 1, "expected " + std::to_string(t.header.size()) + " cells");
    std::vector<double> values;
    std::string week;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (t.header[i] == "week") week = cells[i];
      double v = kMissing;
      const auto& c = cells[i];
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc{} || p != c.data() + c.size()) v = kMissing;
      values.push_back(v);
    }
    t.rows.push_back(std::move(values));
    t.weeks.push_back(week);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_synth(const Globals& g, std::optional<int> years) {
  KeyValues kv = load_config(g);
  if (years) kv.set("synth.years", std::to_string(*years));
  const auto rc = pipeline::run_config_from_key_values(kv, config_dir(g));
  const fs::path out = g.out.empty() ? fs::path("data") : fs::path(g.out);
  const auto gen = synth::generate(rc.generator);
  synth::write_dataset(out, gen.data);
  write_text(out / "bayes_bound.json", synth::to_json(synth::bayes_reference(gen.latent, rc.generator.zones)).dump(2) + "\n");
  write_text(out / "generator.cfg", synth::to_key_values(rc.generator).canonical());
  std::cerr << "wrote " << gen.data.stations.size() << " station weeks, " << gen.data.meteo.size() << " meteo days, "
            << gen.data.upwelling.size() << " upwelling days, " << gen.data.status.size() << " status days to " << out
            << "\n";
  return kOk;
}

int cmd_ingest(const Globals& g, const std::string& stations, const std::string& meteo, const std::string& upwelling,
               const std::string& status) {
  const fs::path out = require_out(g, "dataset file");
  ingest::RawDataset data;
  data.stations = ingest::parse_station_csv(stations);
  data.meteo = ingest::parse_meteo_csv(meteo);
  data.upwelling = ingest::parse_upwelling_csv(upwelling);
  data.status = ingest::parse_zone_status_csv(status);
  const auto report = ingest::validate_dataset(data);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  ingest::save_dataset(out, data);
  for (const auto& [source, cov] : report.coverage) std::cerr << "coverage " << source << ": " << cov << "\n";
  for (const auto& f : report.findings) std::cerr << f.kind << " [" << f.source << "] " << f.detail << "\n";
  std::cerr << "wrote " << out << " (" << report.findings.size() << " finding(s))\n";
  return report.clean() ? kOk : kFindings;
}

int cmd_preprocess(const Globals& g, const std::string& in, const std::string& zone, bool halocline) {
  const fs::path out = g.out.empty() ? fs::path("matrices") : fs::path(g.out);
  const auto data = ingest::load_dataset(in);
  preprocess::AssemblyOptions opts;
  opts.include_halocline = halocline;
  const std::vector<std::string> zones = zone == "all" ? ingest::default_zones() : std::vector<std::string>{zone};
  for (const auto& z : zones) {
    const auto m = preprocess::assemble_zone_matrix(data, z, opts);
    preprocess::save_matrix(out, m);
    const auto mask = m.null_mask();
    std::cerr << z << ": " << m.rows() << " rows, " << (m.rows() - std::count(mask.begin(), mask.end(), true))
              << " complete, " << m.cols() << " features\n";
  }
  return kOk;
}

int cmd_select(const Globals& g, const std::string& matrix_path, const SelectionFlags& flags) {
  const auto m = preprocess::drop_null_rows(preprocess::load_matrix(matrix_path));
  auto report = featsel::select_features(DataView(m), flags.spec(), seed_of(g));
  report.zone_id = m.zone_id;
  write_json(g, featsel::to_json(report));
  return kOk;
}

struct ModelFlags {
  std::string algorithm = "knn";
  int k = 2;
  std::string variant = "gaussian";
  int trees = 100;
  std::string hidden = "8";
  int epochs = 10;

  void add(CLI::App* cmd) {
    cmd->add_option("--algorithm,--family", algorithm, "knn | nb | rf | mlp");
    cmd->add_option("--k", k, "Neighbors (knn)");
    cmd->add_option("--variant", variant, "gaussian | multinomial | complement | bernoulli (nb)");
    cmd->add_option("--trees", trees, "Number of trees (rf)");
    cmd->add_option("--hidden", hidden, "Hidden layer widths such as 10-20 (mlp)");
    cmd->add_option("--epochs", epochs, "Training epochs (mlp)");
  }
  models::ModelSpec spec(std::uint64_t seed) const {
    models::ModelSpec s;
    s.seed = seed;
    switch (models::parse_family(algorithm)) {
      case models::Family::Knn: s.params = models::KnnParams{k}; break;
      case models::Family::NaiveBayes: s.params = models::NaiveBayesParams{models::parse_nb_variant(variant)}; break;
      case models::Family::RandomForest: s.params = models::RandomForestParams{trees}; break;
      case models::Family::Mlp: {
        models::MlpParams p;
        p.hidden_layers = parse_hidden(hidden);
        p.epochs = epochs;
        s.params = p;
        break;
      }
    }
    models::validate(s);
    return s;
  }
};

int cmd_train(const Globals& g, const std::string& matrix_path, const ModelFlags& mf, const SelectionFlags& sf) {
  const fs::path out = require_out(g, "model file");
  const std::uint64_t seed = seed_of(g);
  const auto m = preprocess::load_matrix(matrix_path);
  const auto r = pipeline::train(m, mf.spec(seed), sf.spec(), seed);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  models::save_model(out, r.model);
  std::cerr << "trained " << models::to_string(r.model.spec.family()) << ' ' << r.model.spec.describe() << " on "
            << r.model.feature_names.size() << " feature(s); wrote " << out << "\n";
  return kOk;
}

int cmd_evaluate(const Globals& g, const std::string& matrix_path, const std::string& grid_path,
                 const std::string& preset, unsigned threads, const std::string& table) {
  const auto m = preprocess::drop_null_rows(preprocess::load_matrix(matrix_path));
  eval::Grid grid;
  if (!grid_path.empty()) {
    grid = eval::load_grid(grid_path);
  } else if (preset == "desk") {
    grid = eval::desk_grid();
  } else if (preset != "full") {
    throw Error(ErrorKind::InvalidArgument, "--preset must be desk or full");
  }
  if (threads > 0) grid.threads = threads;
  const auto result = eval::grid_search(m, grid, pipeline::zone_seed(seed_of(g), m.zone_id));
  if (!table.empty()) eval::write_table_csv(table, result.ranked);
  write_json(g, eval::to_json(result));
  const auto& best = eval::select_best(result.ranked);
  std::cerr << m.zone_id << ": best " << models::to_string(best.spec.family()) << ' ' << best.spec.describe()
            << " sensitivity " << best.sensitivity_mean() << " accuracy " << best.accuracy.mean << "\n";
  return kOk;
}

int cmd_stats(const Globals& g, const std::vector<std::string>& outcomes, const std::string& metric, double alpha) {
  write_json(g, pipeline::significance(read_outcomes(outcomes), pipeline::parse_metric(metric), alpha));
  return kOk;
}

int cmd_report(const Globals& g, const std::vector<std::string>& outcomes, const std::string& grid_path,
               const std::string& metric, double alpha) {
  const fs::path out = require_out(g, "report directory");
  std::vector<eval::GridResult> grids;
  const auto all = read_outcomes(outcomes, &grids);
  pipeline::RunManifest manifest;
  manifest.timestamp = pipeline::resolve_timestamp(std::nullopt);
  for (const auto& p : outcomes) manifest.input_digests[fs::path(p).filename().string()] = pipeline::sha256_file(p);
  for (const auto& r : grids) manifest.seeds["zone/" + r.zone_id] = r.seed;

  pipeline::Bundle b;
  for (bool prune : {false, true}) {
    std::vector<eval::EvalOutcome> best;
    std::vector<std::string> zones;
    for (const auto& o : all) {
      if (std::find(zones.begin(), zones.end(), o.zone_id) == zones.end()) zones.push_back(o.zone_id);
    }
    for (const auto& z : zones) {
      std::vector<eval::EvalOutcome> subset;
      for (const auto& o : all) {
        if (o.zone_id == z && o.selection.prune == prune && !o.error) subset.push_back(o);
      }
      if (!subset.empty()) best.push_back(eval::select_best(subset));
    }
    b.files[std::string("tables/approach") + (prune ? "2" : "1") + ".csv"] = eval::table_csv(best);
  }
  if (!grid_path.empty() && !grids.empty()) {
    const auto grid = eval::load_grid(grid_path);
    manifest.config_hashes["grid"] = pipeline::sha256_file(grid_path);
    b.files["persistence.csv"] =
        eval::persistence_csv(eval::persistence(grids, grid, preprocess::feature_names()));
  }
  json st = pipeline::significance(all, pipeline::parse_metric(metric), alpha);
  st["manifest"] = "manifest.json";
  b.files["stats.json"] = st.dump(2) + "\n";
  b.files["manifest.json"] = pipeline::to_json(manifest).dump(2) + "\n";
  pipeline::write_bundle(out, b);
  std::cerr << "wrote report to " << out << "\n";
  return kOk;
}

int cmd_predict(const Globals& g, const std::string& model_path, const std::string& row_path) {
  const auto model = models::load_model(model_path);
  const auto table = read_rows(row_path);
  json records = json::array();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto aligned = pipeline::align_row(model.feature_names, table.header, table.rows[i]);
    json rec = pipeline::predict_record(model, aligned);
    if (!table.weeks[i].empty()) rec["week"] = table.weeks[i];
    records.push_back(std::move(rec));
  }
  write_json(g, records);
  return kOk;
}

int cmd_run(const Globals& g, const std::string& data, const std::vector<std::string>& zones, unsigned threads,
            std::optional<std::int64_t> timestamp) {
  const fs::path out = require_out(g, "report directory");
  KeyValues kv = load_config(g);
  if (!data.empty()) kv.set("data", fs::absolute(data).string());
  if (!zones.empty()) {
    std::string list;
    for (const auto& z : zones) list += (list.empty() ? "" : ",") + z;
    kv.set("zones", list);
  }
  if (threads > 0) kv.set("threads", std::to_string(threads));
  if (timestamp) kv.set("timestamp", std::to_string(*timestamp));
  const auto rc = pipeline::run_config_from_key_values(kv, config_dir(g));
  const auto result = pipeline::run_pipeline(rc);
  pipeline::write_bundle(out, result.bundle);
  std::cerr << "wrote " << result.bundle.files.size() << " file(s) to " << out << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"habgate: weekly open/closed prediction for mussel production areas"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master seed (overrides the config file)");
  app.add_option("--config", g.config, "Flat key=value configuration file");
  app.add_option("--out", g.out, "Output file or directory");

  std::function<int()> action;

  std::optional<int> years;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic estuary in the four CSV schemas");
  synth_cmd->add_option("--years", years, "Number of years");
  synth_cmd->callback([&] { action = [&] { return cmd_synth(g, years); }; });

  std::string stations, meteo, upwelling, status;
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse and validate raw CSVs into a dataset file");
  ingest_cmd->add_option("--stations", stations)->required();
  ingest_cmd->add_option("--meteo", meteo)->required();
  ingest_cmd->add_option("--upwelling", upwelling)->required();
  ingest_cmd->add_option("--status", status)->required();
  ingest_cmd->callback([&] { action = [&] { return cmd_ingest(g, stations, meteo, upwelling, status); }; });

  std::string in_path, zone = "all";
  bool halocline = false;
  auto* pre_cmd = app.add_subcommand("preprocess", "Assemble per-zone design matrices");
  pre_cmd->add_option("--in", in_path, "Dataset file from ingest")->required();
  pre_cmd->add_option("--zone", zone, "Zone name or 'all'");
  pre_cmd->add_flag("--halocline", halocline, "Append the salinity stratification features");
  pre_cmd->callback([&] { action = [&] { return cmd_preprocess(g, in_path, zone, halocline); }; });

  std::string matrix_path;
  SelectionFlags sel_flags;
  auto* sel_cmd = app.add_subcommand("select", "Run feature selection on a matrix");
  sel_cmd->add_option("--matrix", matrix_path)->required();
  sel_cmd->add_option("--report", g.out, "Selection report path (same as --out)");
  sel_flags.add(sel_cmd);
  sel_cmd->callback([&] { action = [&] { return cmd_select(g, matrix_path, sel_flags); }; });

  ModelFlags model_flags;
  auto* train_cmd = app.add_subcommand("train", "Select features and fit one model on all complete rows");
  train_cmd->add_option("--matrix", matrix_path)->required();
  model_flags.add(train_cmd);
  sel_flags.add(train_cmd);
  train_cmd->callback([&] { action = [&] { return cmd_train(g, matrix_path, model_flags, sel_flags); }; });

  std::string grid_path, preset = "desk", table;
  unsigned threads = 0;
  auto* eval_cmd = app.add_subcommand("evaluate", "Grid search under k-fold cross-validation");
  eval_cmd->add_option("--matrix", matrix_path)->required();
  eval_cmd->add_option("--grid", grid_path, "Grid JSON");
  eval_cmd->add_option("--preset", preset, "desk | full (when --grid is absent)");
  eval_cmd->add_option("--threads", threads, "Worker threads");
  eval_cmd->add_option("--table", table, "Also write the ranked table as CSV");
  eval_cmd->callback([&] { action = [&] { return cmd_evaluate(g, matrix_path, grid_path, preset, threads, table); }; });

  std::vector<std::string> outcomes;
  std::string metric = "sensitivity";
  double alpha = 0.05;
  auto* stats_cmd = app.add_subcommand("stats", "Normality, ANOVA and Tukey-Kramer over per-fold metrics");
  stats_cmd->add_option("--outcomes", outcomes)->required();
  stats_cmd->add_option("--metric", metric, "sensitivity | accuracy | kappa");
  stats_cmd->add_option("--alpha", alpha);
  stats_cmd->callback([&] { action = [&] { return cmd_stats(g, outcomes, metric, alpha); }; });

  auto* report_cmd = app.add_subcommand("report", "Write best-model tables, persistence and statistics");
  report_cmd->add_option("--outcomes", outcomes)->required();
  report_cmd->add_option("--grid", grid_path, "Grid JSON used for the outcomes (enables persistence.csv)");
  report_cmd->add_option("--metric", metric);
  report_cmd->add_option("--alpha", alpha);
  report_cmd->callback([&] { action = [&] { return cmd_report(g, outcomes, grid_path, metric, alpha); }; });

  std::string model_path, row_path;
  auto* predict_cmd = app.add_subcommand("predict", "Predict rows with a trained model and explain each decision");
  predict_cmd->add_option("--model", model_path)->required();
  predict_cmd->add_option("--row", row_path, "CSV with a header of feature names")->required();
  predict_cmd->callback([&] { action = [&] { return cmd_predict(g, model_path, row_path); }; });

  std::string data_dir;
  std::vector<std::string> zones;
  std::optional<std::int64_t> timestamp;
  auto* run_cmd = app.add_subcommand("run", "Full pipeline into a report bundle");
  run_cmd->add_option("--data", data_dir, "Directory with the four CSVs (default: synthesize)");
  run_cmd->add_option("--zones", zones, "Restrict to these zones");
  run_cmd->add_option("--threads", threads, "Worker threads");
  run_cmd->add_option("--timestamp", timestamp, "Manifest timestamp as Unix seconds");
  run_cmd->callback([&] { action = [&] { return cmd_run(g, data_dir, zones, threads, timestamp); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kFindings;
  }

  try {
    return action ? action() : kFindings;
  } catch (const MalformedRow& e) {
    std::cerr << "error: malformed row at line " << e.line() << ", column " << e.column() << ": " << e.what() << "\n";
    return kFindings;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error (Io): " << e.what() << "\n";
    return kIo;
  } catch (const json::exception& e) {
    std::cerr << "error (InvalidArgument): " << e.what() << "\n";
    return kFindings;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
