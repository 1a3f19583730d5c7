/**
 * @file ingest.hpp
 * @brief Typed records for the four raw source families and their CSV readers.
 *
 * CSV schemas (UTF-8, comma separated, '.' decimals, empty cell = missing):
 *
 *   stations.csv   station_id,iso_week,profile,chl_0_5,chl_5_10,chl_10_15,dinophysis,
 *                  ammonium,phosphate,nitrate,nitrite
 *                  profile = ';'-joined "depth:temperature:salinity:oxygen" samples
 *   meteo.csv      date,solar_irradiation,sunshine_hours,insolation
 *   upwelling.csv  date,ui_00,ui_06,ui_12,ui_18
 *   status.csv     zone_id,date,status          status in {OPEN, CLOSED}
 */
#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "habgate/core.hpp"

namespace habgate::ingest {

using Value = std::optional<double>;

inline const std::vector<std::string>& default_stations() {
  static const std::vector<std::string> ids{"V1", "V2", "V3", "V4", "V5", "V6", "V7"};
  return ids;
}

/// The twelve production areas, in the canonical order used for reports.
inline const std::vector<std::string>& default_zones() {
  static const std::vector<std::string> ids{"CangasF",    "CangasG",    "CangasH",    "CangasC",
                                            "CangasD",    "CangasE",    "VigoA",      "RedondelaA",
                                            "RedondelaB", "RedondelaC", "RedondelaD", "RedondelaE"};
  return ids;
}

struct DepthSample {
  double depth_m{};
  Value temperature_c;
  Value salinity_psu;
  Value oxygen_mgl;

  bool operator==(const DepthSample&) const = default;
};

struct StationWeekRecord {
  std::string station_id;
  IsoWeek week;
  std::vector<DepthSample> profile;
  Value chl_band_0_5;
  Value chl_band_5_10;
  Value chl_band_10_15;
  Value dinophysis_cells;
  Value ammonium;
  Value phosphate;
  Value nitrate;
  Value nitrite;

  bool operator==(const StationWeekRecord&) const = default;
};

struct MeteoDay {
  Date date;
  Value solar_irradiation;
  Value sunshine_hours;
  Value insolation;

  bool operator==(const MeteoDay&) const = default;
};

struct UpwellingDay {
  Date date;
  std::array<Value, 4> values_4x;  // 00, 06, 12, 18 h

  bool operator==(const UpwellingDay&) const = default;
};

struct ZoneStatusDay {
  std::string zone_id;
  Date date;
  Status status{Status::Open};

  bool operator==(const ZoneStatusDay&) const = default;
};

/// Everything ingested for one run.
struct RawDataset {
  std::vector<StationWeekRecord> stations;
  std::vector<MeteoDay> meteo;
  std::vector<UpwellingDay> upwelling;
  std::vector<ZoneStatusDay> status;

  bool operator==(const RawDataset&) const = default;
};

// Parsers accept either a path or a stream; the stream forms are what the
// path forms call after opening the file.
std::vector<StationWeekRecord> parse_station_csv(const std::filesystem::path& path,
                                                 const std::vector<std::string>& stations = default_stations());
std::vector<StationWeekRecord> parse_station_csv(std::istream& in,
                                                 const std::vector<std::string>& stations = default_stations());
std::vector<MeteoDay> parse_meteo_csv(const std::filesystem::path& path);
std::vector<MeteoDay> parse_meteo_csv(std::istream& in);
std::vector<UpwellingDay> parse_upwelling_csv(const std::filesystem::path& path);
std::vector<UpwellingDay> parse_upwelling_csv(std::istream& in);
std::vector<ZoneStatusDay> parse_zone_status_csv(const std::filesystem::path& path,
                                                 const std::vector<std::string>& zones = default_zones());
std::vector<ZoneStatusDay> parse_zone_status_csv(std::istream& in,
                                                 const std::vector<std::string>& zones = default_zones());

void write_station_csv(std::ostream& out, const std::vector<StationWeekRecord>& records);
void write_meteo_csv(std::ostream& out, const std::vector<MeteoDay>& days);
void write_upwelling_csv(std::ostream& out, const std::vector<UpwellingDay>& days);
void write_zone_status_csv(std::ostream& out, const std::vector<ZoneStatusDay>& days);

/// Number of missing markers held by the records (one per empty cell/subfield).
std::size_t count_missing(const std::vector<StationWeekRecord>& records);
std::size_t count_missing(const std::vector<MeteoDay>& days);
std::size_t count_missing(const std::vector<UpwellingDay>& days);

struct Finding {
  std::string kind;    // "duplicate" | "gap"
  std::string source;  // "stations" | "meteo" | "upwelling" | "status"
  std::string detail;

  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;
  /// Present-record fraction over the covered span, per source family.
  std::map<std::string, double> coverage;

  [[nodiscard]] bool clean() const { return findings.empty(); }
};

ValidationReport validate_dataset(const RawDataset& data);

/// Versioned binary container for an ingested dataset.
void save_dataset(const std::filesystem::path& path, const RawDataset& data);
RawDataset load_dataset(const std::filesystem::path& path);

}  // namespace habgate::ingest
