#include "habgate/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <set>
#include <sstream>

#include "habgate/core.hpp"
#include "habgate/preprocess.hpp"
#include "habgate/stats.hpp"

namespace habgate::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Digests and time
// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Internal, "SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_text(path)); }

std::string resolve_timestamp(std::optional<std::int64_t> explicit_epoch) {
  std::int64_t epoch = 0;
  if (explicit_epoch) {
    epoch = *explicit_epoch;
  } else if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    try {
      epoch = std::stoll(env);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, std::string("SOURCE_DATE_EPOCH is not an integer: ") + env);
    }
  } else {
    epoch = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
  }
  const std::time_t t = static_cast<std::time_t>(epoch);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Significance
// ---------------------------------------------------------------------------

Metric parse_metric(std::string_view s) {
  if (s == "sensitivity" || s == "recall") return Metric::Sensitivity;
  if (s == "accuracy") return Metric::Accuracy;
  if (s == "kappa") return Metric::Kappa;
  throw Error(ErrorKind::InvalidArgument, "unknown metric '" + std::string(s) + "'");
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Sensitivity: return "sensitivity";
    case Metric::Accuracy: return "accuracy";
    case Metric::Kappa: return "kappa";
  }
  return "?";
}

std::vector<double> fold_values(const eval::EvalOutcome& outcome, Metric metric) {
  std::vector<double> out;
  for (const auto& f : outcome.folds) {
    switch (metric) {
      case Metric::Sensitivity:
        if (f.sensitivity) out.push_back(*f.sensitivity);
        break;
      case Metric::Accuracy: out.push_back(f.accuracy); break;
      case Metric::Kappa: out.push_back(f.kappa); break;
    }
  }
  return out;
}

namespace {

std::string approach_name(bool prune) { return prune ? "approach2" : "approach1"; }

template <typename F>
json attempt(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return json{{"error", e.what()}};
  }
}

json significance_block(const std::vector<eval::EvalOutcome>& outcomes, Metric metric, double alpha) {
  const auto best = eval::best_per_family(outcomes);
  std::vector<stats::SampleGroup> groups;
  json jgroups = json::array();
  for (const auto& o : best) {
    stats::SampleGroup g{std::string(models::to_string(o.spec.family())) + " " + o.spec.describe(),
                         fold_values(o, metric)};
    jgroups.push_back({{"name", g.name},
                       {"algorithm", models::to_string(o.spec.family())},
                       {"params", o.spec.describe()},
                       {"selection", featsel::to_json(o.selection)},
                       {"cell_index", o.cell_index},
                       {"values", g.values}});
    groups.push_back(std::move(g));
  }
  json normality = json::array();
  for (const auto& g : groups) {
    normality.push_back({{"group", g.name},
                         {"shapiro_wilk", attempt([&] { return stats::to_json(stats::shapiro_wilk(g.values, alpha)); })},
                         {"anderson_darling",
                          attempt([&] { return stats::to_json(stats::anderson_darling(g.values, alpha)); })}});
  }
  json anova = attempt([&] { return stats::to_json(stats::one_way_anova(groups, alpha)); });
  json tukey = attempt([&] {
    json arr = json::array();
    for (const auto& p : stats::tukey_kramer(groups, alpha)) arr.push_back(stats::to_json(p));
    return arr;
  });
  return {{"groups", jgroups}, {"normality", normality}, {"anova", anova}, {"tukey_kramer", tukey}};
}

}  // namespace

json significance(const std::vector<eval::EvalOutcome>& outcomes, Metric metric, double alpha) {
  std::vector<std::string> zones;
  for (const auto& o : outcomes) {
    if (std::find(zones.begin(), zones.end(), o.zone_id) == zones.end()) zones.push_back(o.zone_id);
  }
  json jz = json::array();
  for (const auto& z : zones) {
    for (bool prune : {false, true}) {
      std::vector<eval::EvalOutcome> subset;
      for (const auto& o : outcomes) {
        if (o.zone_id == z && o.selection.prune == prune) subset.push_back(o);
      }
      if (subset.empty()) continue;
      json block = significance_block(subset, metric, alpha);
      block["zone"] = z;
      block["approach"] = approach_name(prune);
      jz.push_back(std::move(block));
    }
  }
  return {{"metric", to_string(metric)}, {"alpha", alpha}, {"results", jz}};
}

// ---------------------------------------------------------------------------
// Manifest and bundle
// ---------------------------------------------------------------------------

json to_json(const RunManifest& m) {
  json seeds = json::object();
  for (const auto& [k, v] : m.seeds) seeds[k] = std::to_string(v);
  return {{"format", "habgate-manifest"},
          {"version", 1},
          {"tool_version", m.tool_version},
          {"seeds", seeds},
          {"config_hashes", m.config_hashes},
          {"input_digests", m.input_digests},
          {"timestamp", m.timestamp},
          {"feature_counts", m.feature_counts},
          {"rows", m.rows}};
}

void write_bundle(const fs::path& dir, const Bundle& bundle) {
  std::error_code ec;
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "'" + dir.string() + "' exists and is not a directory");
    if (!fs::is_empty(dir) && !fs::exists(dir / "manifest.json")) {
      throw Error(ErrorKind::Io, "refusing to replace '" + dir.string() + "': not empty and not a report bundle");
    }
  }
  const fs::path parent = dir.has_parent_path() ? dir.parent_path() : fs::path(".");
  fs::create_directories(parent);
  const fs::path staging = parent / ("." + dir.filename().string() + ".staging");
  fs::remove_all(staging, ec);
  fs::create_directories(staging);
  for (const auto& [rel, bytes] : bundle.files) {
    const fs::path target = staging / rel;
    fs::create_directories(target.parent_path());
    write_text(target, bytes);
  }
  if (fs::exists(dir)) fs::remove_all(dir);
  fs::rename(staging, dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot publish bundle to '" + dir.string() + "': " + ec.message());
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

RunConfig run_config_from_key_values(const KeyValues& kv, const fs::path& base_dir) {
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  RunConfig c;
  c.seed = kv.get_u64("seed", c.seed);

  KeyValues gen;
  gen.set("seed", std::to_string(c.seed));
  for (const auto& [k, v] : kv.entries()) {
    if (k.rfind("synth.", 0) == 0) gen.set(k.substr(6), v);
  }
  c.generator = synth::config_from_key_values(gen);

  if (auto d = kv.get("data")) c.data_dir = resolve(*d);
  if (auto g = kv.get("grid")) {
    c.grid = eval::load_grid(resolve(*g));
  } else {
    const std::string preset = kv.get_or("grid_preset", "desk");
    if (preset == "full") {
      c.grid = eval::Grid{};
    } else if (preset != "desk") {
      throw Error(ErrorKind::InvalidArgument, "grid_preset must be desk or full, got '" + preset + "'");
    }
  }
  c.grid.threads = static_cast<unsigned>(kv.get_int("threads", c.grid.threads));
  c.grid.folds = static_cast<std::size_t>(kv.get_int("folds", static_cast<std::int64_t>(c.grid.folds)));
  c.grid.stratified = kv.get_bool("stratified", c.grid.stratified);
  c.zones = kv.get_list("zones", c.generator.zones);
  if (kv.has("timestamp")) c.timestamp = kv.get_int("timestamp", 0);
  c.alpha = kv.get_double("alpha", c.alpha);
  c.metric = parse_metric(kv.get_or("metric", "sensitivity"));
  c.verbose = kv.get_bool("verbose", c.verbose);
  if (c.grid.threads == 0) throw Error(ErrorKind::InvalidArgument, "threads must be at least 1");
  for (const auto& z : c.zones) {
    if (std::find(c.generator.zones.begin(), c.generator.zones.end(), z) == c.generator.zones.end()) {
      throw Error(ErrorKind::UnknownZone, "unknown zone '" + z + "'");
    }
  }
  // Thread count does not change results, so it stays out of the hash.
  KeyValues hashed;
  for (const auto& [k, v] : kv.entries()) {
    if (k != "threads" && k != "verbose") hashed.set(k, v);
  }
  c.canonical_config = hashed.canonical();
  return c;
}

std::uint64_t zone_seed(std::uint64_t seed, const std::string& zone) { return mix_seed(seed, fnv1a(zone)); }

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

ingest::RawDataset load_inputs(const RunConfig& config, RunManifest& manifest) {
  const std::vector<std::string> names{"stations.csv", "meteo.csv", "upwelling.csv", "status.csv"};
  std::map<std::string, std::string> text;
  if (config.data_dir) {
    for (const auto& n : names) {
      const fs::path p = *config.data_dir / n;
      if (!fs::exists(p)) throw Error(ErrorKind::Io, "missing input file '" + p.string() + "'");
      text[n] = read_text(p);
      manifest.input_digests[n] = sha256_hex(text[n]);
    }
  } else {
    manifest.seeds["generator"] = config.generator.seed;
    const auto gen = synth::generate(config.generator);
    std::ostringstream s, m, u, z;
    ingest::write_station_csv(s, gen.data.stations);
    ingest::write_meteo_csv(m, gen.data.meteo);
    ingest::write_upwelling_csv(u, gen.data.upwelling);
    ingest::write_zone_status_csv(z, gen.data.status);
    text = {{"stations.csv", s.str()}, {"meteo.csv", m.str()}, {"upwelling.csv", u.str()}, {"status.csv", z.str()}};
    for (const auto& n : names) manifest.input_digests["synth/" + n] = sha256_hex(text[n]);
  }
  ingest::RawDataset data;
  std::istringstream s(text["stations.csv"]), m(text["meteo.csv"]), u(text["upwelling.csv"]), z(text["status.csv"]);
  data.stations = ingest::parse_station_csv(s, config.generator.stations);
  data.meteo = ingest::parse_meteo_csv(m);
  data.upwelling = ingest::parse_upwelling_csv(u);
  data.status = ingest::parse_zone_status_csv(z, config.generator.zones);
  return data;
}

RunResult run_pipeline(const RunConfig& config) {
  RunResult result;
  RunManifest& manifest = result.manifest;
  manifest.seeds["master"] = config.seed;
  manifest.timestamp = resolve_timestamp(config.timestamp);
  json grid_json = eval::to_json(config.grid);
  grid_json.erase("threads");
  manifest.config_hashes["config"] = sha256_hex(config.canonical_config);
  manifest.config_hashes["grid"] = sha256_hex(grid_json.dump());
  if (!config.data_dir) manifest.config_hashes["generator"] = sha256_hex(synth::to_key_values(config.generator).canonical());

  const auto data = load_inputs(config, manifest);
  preprocess::AssemblyOptions assembly;
  assembly.stations = config.generator.stations;
  const auto feature_order = preprocess::feature_names(assembly.stations);

  std::vector<eval::EvalOutcome> all;
  for (const auto& zone : config.zones) {
    const auto started = std::chrono::steady_clock::now();
    const DesignMatrix matrix = preprocess::drop_null_rows(preprocess::assemble_zone_matrix(data, zone, assembly));
    const std::uint64_t seed = zone_seed(config.seed, zone);
    manifest.seeds["zone/" + zone] = seed;
    manifest.rows[zone] = matrix.rows();
    manifest.feature_counts[zone]["approach1"] = matrix.cols();
    manifest.feature_counts[zone]["approach2"] =
        featsel::prune_correlated(DataView(matrix), config.grid.prune_threshold).kept.size();

    auto grid = eval::grid_search(matrix, config.grid, seed);
    for (std::size_t a = 0; a < grid.fold_seeds.size(); ++a) {
      manifest.seeds["folds/" + zone + "/" + approach_name(config.grid.prune[a])] = grid.fold_seeds[a];
    }
    all.insert(all.end(), grid.ranked.begin(), grid.ranked.end());
    if (config.verbose) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      const auto& best = eval::select_best(grid.ranked);
      std::cerr << zone << ": " << matrix.rows() << " rows, " << grid.ranked.size() << " cells, best "
                << models::to_string(best.spec.family()) << ' ' << best.spec.describe() << " sensitivity "
                << best.sensitivity_mean() << " (" << secs << " s)\n";
    }
    result.grids.push_back(std::move(grid));
  }

  // Report files.
  Bundle& b = result.bundle;
  for (bool prune : config.grid.prune) {
    std::vector<eval::EvalOutcome> best, families;
    for (const auto& g : result.grids) {
      std::vector<eval::EvalOutcome> subset;
      for (const auto& o : g.ranked) {
        if (o.selection.prune == prune) subset.push_back(o);
      }
      if (subset.empty() || subset.front().error) continue;
      best.push_back(eval::select_best(subset));
      for (auto& f : eval::best_per_family(subset)) families.push_back(std::move(f));
    }
    b.files["tables/" + approach_name(prune) + ".csv"] = eval::table_csv(best);
    b.files["tables/" + approach_name(prune) + "_families.csv"] = eval::table_csv(families);
  }
  for (const auto& g : result.grids) {
    b.files["grid/" + g.zone_id + ".csv"] = eval::table_csv(g.ranked);
    b.files["outcomes/" + g.zone_id + ".json"] = eval::to_json(g).dump(1) + "\n";
  }
  b.files["persistence.csv"] = eval::persistence_csv(eval::persistence(result.grids, config.grid, feature_order));
  json st = significance(all, config.metric, config.alpha);
  st["manifest"] = "manifest.json";
  b.files["stats.json"] = st.dump(2) + "\n";
  b.files["grid.json"] = grid_json.dump(2) + "\n";
  b.files["config.txt"] = config.canonical_config;
  if (!config.data_dir) {
    b.files["bayes_bound.json"] = synth::to_json(synth::bayes_reference(config.generator)).dump(2) + "\n";
  }
  json jm = to_json(manifest);
  json digests = json::object();
  for (const auto& [rel, bytes] : b.files) digests[rel] = sha256_hex(bytes);
  jm["files"] = digests;
  b.files["manifest.json"] = jm.dump(2) + "\n";
  return result;
}

// ---------------------------------------------------------------------------
// Training and prediction
// ---------------------------------------------------------------------------

TrainResult train(const DesignMatrix& matrix, const models::ModelSpec& spec, const featsel::SelectionSpec& selection,
                  std::uint64_t seed) {
  const DesignMatrix complete = preprocess::drop_null_rows(matrix);
  if (complete.rows() == 0) throw Error(ErrorKind::EmptyMatrix, "matrix " + matrix.zone_id + " has no complete rows");
  DataView all(complete);
  TrainResult out;
  out.selection = featsel::select_features(all, selection, seed);
  out.selection.zone_id = complete.zone_id;
  out.model = models::fit_model(spec, all.select_named(out.selection.selected));
  return out;
}

std::vector<double> align_row(const std::vector<std::string>& model_features, const std::vector<std::string>& names,
                              std::span<const double> values) {
  if (names.size() != values.size()) {
    throw Error(ErrorKind::FeatureMismatch, "row has " + std::to_string(values.size()) + " values but " +
                                                std::to_string(names.size()) + " column names");
  }
  std::map<std::string, double> by_name;
  for (std::size_t i = 0; i < names.size(); ++i) by_name[names[i]] = values[i];
  std::vector<double> out;
  std::vector<std::string> missing;
  for (const auto& f : model_features) {
    auto it = by_name.find(f);
    if (it == by_name.end()) {
      missing.push_back(f);
    } else {
      out.push_back(it->second);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorKind::FeatureMismatch, "missing feature column(s): " + list);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (is_missing(out[i])) throw Error(ErrorKind::FeatureMismatch, "feature '" + model_features[i] + "' is empty");
  }
  return out;
}

json predict_record(const models::TrainedModel& model, std::span<const double> aligned_row) {
  json j = models::to_json(model.explain(aligned_row));
  j["model"] = models::spec_to_json(model.spec);
  j["features"] = model.feature_names;
  return j;
}

}  // namespace habgate::pipeline
