/**
 * @file synth.hpp
 * @brief Seeded synthetic estuary producing records in the four ingest schemas.
 *
 * A weekly latent bloom index follows a seasonal AR(1) process nudged by
 * upwelling. Station Dinophysis counts, chlorophyll and nutrients are drawn
 * conditional on it. Each zone carries a half-weekly toxicity process
 * (Mondays and Fridays) pulled toward its exposure to the bloom; the zone is
 * latently closed when toxicity exceeds a threshold set so the configured
 * closure fraction is met. Observed closures add precautionary closures
 * (Open flipped to Closed) so that a share `label_noise` of observed
 * closures has no latent cause.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "habgate/config.hpp"
#include "habgate/ingest.hpp"

namespace habgate::synth {

/// Closure fractions of the twelve areas (share of Mondays closed).
const std::map<std::string, double>& default_closure_rates();

struct GeneratorConfig {
  std::uint64_t seed = 1;
  int n_years = 15;
  int start_year = 2004;
  std::vector<std::string> stations = ingest::default_stations();
  std::vector<std::string> zones = ingest::default_zones();
  /// Share of weeks in which each source has an outage. Outage weeks of
  /// different sources are disjoint while the shares sum to at most 1.
  double missing_stations = 0.62;
  double missing_meteo = 0.10;
  double missing_upwelling = 0.06;
  /// Scales the seasonal bloom amplitude.
  double bloom_intensity = 1.0;
  /// Share of observed closures without a latent cause.
  double label_noise = 0.03;
  /// Week-to-week autocorrelation of station measurement anomalies.
  double anomaly_memory = 0.85;
  /// Half-week autocorrelation of zone toxicity.
  double persistence = 0.85;
  /// Innovation s.d. of zone toxicity.
  double toxicity_noise = 0.10;
  std::map<std::string, double> closure_rates = default_closure_rates();

  void validate() const;
};

GeneratorConfig config_from_key_values(const KeyValues& kv);
KeyValues to_key_values(const GeneratorConfig& config);

/// Latent series kept alongside the records for oracle use.
struct LatentState {
  std::vector<IsoWeek> weeks;
  std::vector<double> bloom;  // per week
  /// Per zone: latent and observed status on each Monday after weeks[i].
  std::map<std::string, std::vector<Status>> latent_monday;
  std::map<std::string, std::vector<Status>> observed_monday;
  std::map<std::string, double> thresholds;
};

struct Generated {
  ingest::RawDataset data;
  LatentState latent;
};

Generated generate(const GeneratorConfig& config);

/// Writes stations.csv, meteo.csv, upwelling.csv and status.csv into dir.
void write_dataset(const std::filesystem::path& dir, const ingest::RawDataset& data);

struct ZoneBound {
  std::string zone_id;
  /// Metrics of the latent closure rule scored against observed Monday labels.
  double sensitivity = 1.0;
  double accuracy = 1.0;
  double closure_fraction = 0.0;
  double latent_fraction = 0.0;
};

/// Per-zone achievable metrics of the generator's own noiseless rule.
std::vector<ZoneBound> bayes_reference(const GeneratorConfig& config);
std::vector<ZoneBound> bayes_reference(const LatentState& latent, const std::vector<std::string>& zones);

nlohmann::json to_json(const std::vector<ZoneBound>& bounds);

}  // namespace habgate::synth
