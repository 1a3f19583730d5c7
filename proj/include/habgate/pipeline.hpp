/**
 * @file pipeline.hpp
 * @brief End-to-end runs, significance summaries, report bundles and single-row prediction.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "habgate/config.hpp"
#include "habgate/eval.hpp"
#include "habgate/featsel.hpp"
#include "habgate/ingest.hpp"
#include "habgate/models/model.hpp"
#include "habgate/synth.hpp"

namespace habgate::pipeline {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/**
 * @brief Run timestamp: explicit value, else SOURCE_DATE_EPOCH, else the wall clock.
 * @return ISO-8601 UTC text such as "2024-01-31T12:00:00Z".
 */
std::string resolve_timestamp(std::optional<std::int64_t> explicit_epoch);

// ---------------------------------------------------------------------------
// Significance suite over per-fold metrics
// ---------------------------------------------------------------------------

enum class Metric { Sensitivity, Accuracy, Kappa };
Metric parse_metric(std::string_view s);
std::string_view to_string(Metric m);

/// Per-fold values of one outcome; folds with undefined sensitivity are skipped.
std::vector<double> fold_values(const eval::EvalOutcome& outcome, Metric metric);

/**
 * @brief Normality tests, ANOVA and Tukey-Kramer over the best configuration of each family.
 *
 * Groups are formed per zone and per approach (prune off / on). A test that
 * cannot run on a group (too few values, zero variance) is reported with an
 * "error" entry instead of aborting the suite.
 */
nlohmann::json significance(const std::vector<eval::EvalOutcome>& outcomes, Metric metric, double alpha);

// ---------------------------------------------------------------------------
// Report bundle
// ---------------------------------------------------------------------------

struct RunManifest {
  std::string tool_version{kToolVersion};
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> config_hashes;
  std::map<std::string, std::string> input_digests;
  std::string timestamp;
  /// zone -> {"approach1": columns before pruning, "approach2": columns kept by pruning}
  std::map<std::string, std::map<std::string, std::size_t>> feature_counts;
  /// zone -> complete rows used for evaluation
  std::map<std::string, std::size_t> rows;
};

nlohmann::json to_json(const RunManifest& m);

/// Relative path -> file bytes. Written by a single writer in one step.
struct Bundle {
  std::map<std::string, std::string> files;
};

/**
 * @brief Publishes a bundle into dir through a staging directory and a rename.
 *
 * An existing dir is replaced only when it is empty or holds a previous bundle
 * (a manifest.json); anything else is refused with an Io error.
 */
void write_bundle(const std::filesystem::path& dir, const Bundle& bundle);

// ---------------------------------------------------------------------------
// Full run
// ---------------------------------------------------------------------------

struct RunConfig {
  std::uint64_t seed = 1;
  /// Directory with stations.csv, meteo.csv, upwelling.csv and status.csv. Absent: synthesize.
  std::optional<std::filesystem::path> data_dir;
  synth::GeneratorConfig generator;
  eval::Grid grid = eval::desk_grid();
  std::vector<std::string> zones = ingest::default_zones();
  std::optional<std::int64_t> timestamp;
  double alpha = 0.05;
  Metric metric = Metric::Sensitivity;
  bool verbose = true;
  /// Canonical text of the source configuration, hashed into the manifest.
  std::string canonical_config;
};

/**
 * @brief Builds a run configuration from key=value entries.
 *
 * Keys: seed, data, grid (JSON path) or grid_preset (desk|full), zones,
 * threads, folds, stratified, timestamp, alpha, metric, and any generator key
 * prefixed with "synth." (for example synth.years). Relative paths resolve
 * against base_dir.
 */
RunConfig run_config_from_key_values(const KeyValues& kv, const std::filesystem::path& base_dir = {});

struct RunResult {
  RunManifest manifest;
  std::vector<eval::GridResult> grids;
  Bundle bundle;
};

/// Raw data of a run: read from data_dir or generated; records input digests.
ingest::RawDataset load_inputs(const RunConfig& config, RunManifest& manifest);

RunResult run_pipeline(const RunConfig& config);

/// Seed of the grid search for one zone.
std::uint64_t zone_seed(std::uint64_t seed, const std::string& zone);

// ---------------------------------------------------------------------------
// Training and prediction
// ---------------------------------------------------------------------------

struct TrainResult {
  models::TrainedModel model;
  featsel::SelectionReport selection;
};

/// Selects features on all rows of the matrix, then fits the model on them.
TrainResult train(const DesignMatrix& matrix, const models::ModelSpec& spec, const featsel::SelectionSpec& selection,
                  std::uint64_t seed);

/**
 * @brief Reorders a named row into the model's feature order.
 * @throws Error(FeatureMismatch) listing every model feature absent from names.
 */
std::vector<double> align_row(const std::vector<std::string>& model_features, const std::vector<std::string>& names,
                              std::span<const double> values);

/// Label and rationale record for one aligned row.
nlohmann::json predict_record(const models::TrainedModel& model, std::span<const double> aligned_row);

}  // namespace habgate::pipeline
