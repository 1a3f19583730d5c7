/**
 * @file preprocess.hpp
 * @brief Weekly feature engineering and per-zone design-matrix assembly.
 *
 * Default layout, 76 columns per zone:
 *   per station (7 each): temperature 0-12 m mean, thermocline differential,
 *   salinity mean, oxygen mean, chlorophyll (max band), Dinophysis count,
 *   ammonium, phosphate, nitrate, nitrite;
 *   estuary-wide weekly means: solar irradiation, sunshine hours, insolation,
 *   upwelling index; ISO week number; Friday status of the target zone.
 */
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "habgate/ingest.hpp"
#include "habgate/matrix.hpp"

namespace habgate::preprocess {

enum class ProfileField { Temperature, Salinity, Oxygen };
enum class MeteoField { SolarIrradiation, SunshineHours, Insolation };

/// Maximum over the present chlorophyll depth bands. Throws AllMissing.
double chlorophyll_weekly(const ingest::StationWeekRecord& record);

/// Mean of present values at depth <= 12 m. Throws AllMissing.
double column_mean_0_12(std::span<const ingest::DepthSample> profile, ProfileField field);

/// mean(depth <= 6 m) - mean(6 m < depth <= 12 m). Throws BandMissing.
double stratification_differential(std::span<const ingest::DepthSample> profile, ProfileField field);

/// Mean of present daily values falling in the ISO week. Throws AllMissing.
double weekly_mean_daily(std::span<const ingest::MeteoDay> days, IsoWeek week, MeteoField field);
/// Upwelling: the four sub-daily readings of every day are pooled first.
double weekly_mean_daily(std::span<const ingest::UpwellingDay> days, IsoWeek week);

/// ISO-8601 week number (1..53) of the date.
int seasonality(Date date);

/// Status of `zone` on the Monday after `week`. Throws LabelMissing.
Status monday_label(std::span<const ingest::ZoneStatusDay> history, const std::string& zone, IsoWeek week);

/// The 75 zone-independent feature names followed by "friday_status".
std::vector<std::string> feature_names(const std::vector<std::string>& stations = ingest::default_stations());

struct AssemblyOptions {
  std::vector<std::string> stations = ingest::default_stations();
  /// Adds a halocline differential per station after the thermocline block.
  bool include_halocline = false;
};

/**
 * @brief Builds the design matrix for one zone.
 *
 * One row per ISO week between the first and last station week that has a
 * Monday label; weeks without a label are skipped. Feature cells that
 * cannot be computed (missing source data) hold NaN.
 */
DesignMatrix assemble_zone_matrix(const ingest::RawDataset& data, const std::string& zone,
                                  const AssemblyOptions& options = {});

/// Keeps complete rows in order. Warns on stderr when nothing survives.
DesignMatrix drop_null_rows(const DesignMatrix& matrix);

/// Per-feature min/max learned from training rows.
struct Scaler {
  std::vector<double> min;
  std::vector<double> max;

  [[nodiscard]] std::size_t size() const { return min.size(); }
  /// Constant training features map to 0; no clipping outside [0, 1].
  [[nodiscard]] double apply(std::size_t feature, double value) const {
    double span = max[feature] - min[feature];
    return span > 0.0 ? (value - min[feature]) / span : 0.0;
  }
};

Scaler minmax_fit(const DataView& train);
Scaler minmax_fit(const Dense& train);
void minmax_apply(const Scaler& scaler, Dense& rows);
std::vector<double> minmax_apply(const Scaler& scaler, std::span<const double> row);

/// Writes <dir>/<zone>.csv plus <dir>/<zone>.json (feature names, zone, label column).
void save_matrix(const std::filesystem::path& dir, const DesignMatrix& matrix);
/// Reads a matrix CSV; the sidecar manifest is used when present.
DesignMatrix load_matrix(const std::filesystem::path& csv_path);

}  // namespace habgate::preprocess
