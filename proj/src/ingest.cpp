#include "habgate/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/array.hpp>
#include <cereal/types/optional.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/vector.hpp>

namespace habgate::ingest {

namespace {

constexpr std::string_view kStationHeader =
    "station_id,iso_week,profile,chl_0_5,chl_5_10,chl_10_15,dinophysis,ammonium,phosphate,nitrate,nitrite";
constexpr std::string_view kMeteoHeader = "date,solar_irradiation,sunshine_hours,insolation";
constexpr std::string_view kUpwellingHeader = "date,ui_00,ui_06,ui_12,ui_18";
constexpr std::string_view kStatusHeader = "zone_id,date,status";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

/// Reads lines, strips CR and a UTF-8 BOM, checks the header and yields cells.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string_view header, std::size_t columns)
      : in_(in), columns_(columns) {
    std::string first;
    if (!std::getline(in_, first)) throw MalformedRow(1, 1, "missing header");
    ++line_;
    strip(first);
    if (first.rfind("\xEF\xBB\xBF", 0) == 0) first.erase(0, 3);
    if (trim(first) != header) {
      throw MalformedRow(1, 1, "header mismatch, expected '" + std::string(header) + "'");
    }
  }

  /// Returns false at end of input. Blank lines are skipped.
  bool next(std::vector<std::string_view>& cells) {
    while (std::getline(in_, buffer_)) {
      ++line_;
      strip(buffer_);
      if (trim(buffer_).empty()) continue;
      cells = split(buffer_, ',');
      if (cells.size() != columns_) {
        throw MalformedRow(line_, std::min(cells.size(), columns_) + 1,
                           "expected " + std::to_string(columns_) + " cells, got " + std::to_string(cells.size()));
      }
      for (auto& c : cells) c = trim(c);
      return true;
    }
    return false;
  }

  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  static void strip(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  std::istream& in_;
  std::size_t columns_;
  std::size_t line_ = 0;
  std::string buffer_;
};

Value parse_value(std::string_view cell, std::size_t line, std::size_t column) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw MalformedRow(line, column, "not a finite number: '" + std::string(cell) + "'");
  }
  return v;
}

Value parse_non_negative(std::string_view cell, std::size_t line, std::size_t column) {
  Value v = parse_value(cell, line, column);
  if (v && *v < 0.0) throw MalformedRow(line, column, "negative value: '" + std::string(cell) + "'");
  return v;
}

Date parse_date_cell(std::string_view cell, std::size_t line, std::size_t column) {
  try {
    return parse_date(cell);
  } catch (const Error&) {
    throw MalformedRow(line, column, "invalid date: '" + std::string(cell) + "'");
  }
}

std::vector<DepthSample> parse_profile(std::string_view cell, std::size_t line, std::size_t column) {
  std::vector<DepthSample> profile;
  if (cell.empty()) return profile;
  for (auto sample : split(cell, ';')) {
    auto parts = split(trim(sample), ':');
    if (parts.size() != 4) throw MalformedRow(line, column, "profile sample needs depth:temp:sal:oxy");
    Value depth = parse_value(trim(parts[0]), line, column);
    if (!depth || *depth < 0.0) throw MalformedRow(line, column, "invalid depth '" + std::string(parts[0]) + "'");
    profile.push_back(DepthSample{*depth, parse_value(trim(parts[1]), line, column),
                                  parse_value(trim(parts[2]), line, column),
                                  parse_value(trim(parts[3]), line, column)});
  }
  return profile;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return in;
}

void put(std::ostream& out, const Value& v) {
  if (!v) return;
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, *v);
  out.write(buf, ptr - buf);
}

void put(std::ostream& out, double v) { put(out, Value{v}); }

}  // namespace

// ---------------------------------------------------------------------------
// Parsers
// ---------------------------------------------------------------------------

std::vector<StationWeekRecord> parse_station_csv(std::istream& in, const std::vector<std::string>& stations) {
  CsvReader reader(in, kStationHeader, 11);
  std::vector<StationWeekRecord> out;
  std::vector<std::string_view> c;
  while (reader.next(c)) {
    const std::size_t ln = reader.line();
    StationWeekRecord r;
    r.station_id = std::string(c[0]);
    if (std::find(stations.begin(), stations.end(), r.station_id) == stations.end()) {
      throw Error(ErrorKind::UnknownStation,
                  "unknown station '" + r.station_id + "' at line " + std::to_string(ln));
    }
    try {
      r.week = parse_iso_week(c[1]);
    } catch (const Error&) {
      throw MalformedRow(ln, 2, "invalid ISO week '" + std::string(c[1]) + "'");
    }
    r.profile = parse_profile(c[2], ln, 3);
    r.chl_band_0_5 = parse_non_negative(c[3], ln, 4);
    r.chl_band_5_10 = parse_non_negative(c[4], ln, 5);
    r.chl_band_10_15 = parse_non_negative(c[5], ln, 6);
    r.dinophysis_cells = parse_non_negative(c[6], ln, 7);
    r.ammonium = parse_value(c[7], ln, 8);
    r.phosphate = parse_value(c[8], ln, 9);
    r.nitrate = parse_value(c[9], ln, 10);
    r.nitrite = parse_value(c[10], ln, 11);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<StationWeekRecord> parse_station_csv(const std::filesystem::path& path,
                                                 const std::vector<std::string>& stations) {
  auto in = open_or_throw(path);
  return parse_station_csv(in, stations);
}

std::vector<MeteoDay> parse_meteo_csv(std::istream& in) {
  CsvReader reader(in, kMeteoHeader, 4);
  std::vector<MeteoDay> out;
  std::vector<std::string_view> c;
  while (reader.next(c)) {
    const std::size_t ln = reader.line();
    out.push_back(MeteoDay{parse_date_cell(c[0], ln, 1), parse_value(c[1], ln, 2), parse_value(c[2], ln, 3),
                           parse_value(c[3], ln, 4)});
  }
  return out;
}

std::vector<MeteoDay> parse_meteo_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_meteo_csv(in);
}

std::vector<UpwellingDay> parse_upwelling_csv(std::istream& in) {
  CsvReader reader(in, kUpwellingHeader, 5);
  std::vector<UpwellingDay> out;
  std::vector<std::string_view> c;
  while (reader.next(c)) {
    const std::size_t ln = reader.line();
    UpwellingDay d{parse_date_cell(c[0], ln, 1), {}};
    for (std::size_t i = 0; i < 4; ++i) d.values_4x[i] = parse_value(c[i + 1], ln, i + 2);
    out.push_back(d);
  }
  return out;
}

std::vector<UpwellingDay> parse_upwelling_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_upwelling_csv(in);
}

std::vector<ZoneStatusDay> parse_zone_status_csv(std::istream& in, const std::vector<std::string>& zones) {
  CsvReader reader(in, kStatusHeader, 3);
  std::vector<ZoneStatusDay> out;
  std::vector<std::string_view> c;
  while (reader.next(c)) {
    const std::size_t ln = reader.line();
    ZoneStatusDay d;
    d.zone_id = std::string(c[0]);
    if (std::find(zones.begin(), zones.end(), d.zone_id) == zones.end()) {
      throw Error(ErrorKind::UnknownZone, "unknown zone '" + d.zone_id + "' at line " + std::to_string(ln));
    }
    d.date = parse_date_cell(c[1], ln, 2);
    std::string token(c[2]);
    std::transform(token.begin(), token.end(), token.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
    if (token == "OPEN") {
      d.status = Status::Open;
    } else if (token == "CLOSED") {
      d.status = Status::Closed;
    } else {
      throw MalformedRow(ln, 3, "status must be OPEN or CLOSED, got '" + std::string(c[2]) + "'");
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<ZoneStatusDay> parse_zone_status_csv(const std::filesystem::path& path,
                                                 const std::vector<std::string>& zones) {
  auto in = open_or_throw(path);
  return parse_zone_status_csv(in, zones);
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

void write_station_csv(std::ostream& out, const std::vector<StationWeekRecord>& records) {
  out << kStationHeader << '\n';
  for (const auto& r : records) {
    out << r.station_id << ',' << format_iso_week(r.week) << ',';
    for (std::size_t i = 0; i < r.profile.size(); ++i) {
      const auto& s = r.profile[i];
      if (i) out << ';';
      put(out, s.depth_m);
      out << ':';
      put(out, s.temperature_c);
      out << ':';
      put(out, s.salinity_psu);
      out << ':';
      put(out, s.oxygen_mgl);
    }
    for (const Value* v : {&r.chl_band_0_5, &r.chl_band_5_10, &r.chl_band_10_15, &r.dinophysis_cells, &r.ammonium,
                           &r.phosphate, &r.nitrate, &r.nitrite}) {
      out << ',';
      put(out, *v);
    }
    out << '\n';
  }
}

void write_meteo_csv(std::ostream& out, const std::vector<MeteoDay>& days) {
  out << kMeteoHeader << '\n';
  for (const auto& d : days) {
    out << format_date(d.date) << ',';
    put(out, d.solar_irradiation);
    out << ',';
    put(out, d.sunshine_hours);
    out << ',';
    put(out, d.insolation);
    out << '\n';
  }
}

void write_upwelling_csv(std::ostream& out, const std::vector<UpwellingDay>& days) {
  out << kUpwellingHeader << '\n';
  for (const auto& d : days) {
    out << format_date(d.date);
    for (const auto& v : d.values_4x) {
      out << ',';
      put(out, v);
    }
    out << '\n';
  }
}

void write_zone_status_csv(std::ostream& out, const std::vector<ZoneStatusDay>& days) {
  out << kStatusHeader << '\n';
  for (const auto& d : days) out << d.zone_id << ',' << format_date(d.date) << ',' << to_string(d.status) << '\n';
}

std::size_t count_missing(const std::vector<StationWeekRecord>& records) {
  std::size_t n = 0;
  for (const auto& r : records) {
    for (const auto& s : r.profile) n += !s.temperature_c + !s.salinity_psu + !s.oxygen_mgl;
    for (const Value* v : {&r.chl_band_0_5, &r.chl_band_5_10, &r.chl_band_10_15, &r.dinophysis_cells, &r.ammonium,
                           &r.phosphate, &r.nitrate, &r.nitrite}) {
      n += !v->has_value();
    }
  }
  return n;
}

std::size_t count_missing(const std::vector<MeteoDay>& days) {
  std::size_t n = 0;
  for (const auto& d : days) n += !d.solar_irradiation + !d.sunshine_hours + !d.insolation;
  return n;
}

std::size_t count_missing(const std::vector<UpwellingDay>& days) {
  std::size_t n = 0;
  for (const auto& d : days)
    for (const auto& v : d.values_4x) n += !v;
  return n;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

template <typename Day>
void check_daily(const std::vector<Day>& days, const std::string& source, ValidationReport& report) {
  if (days.empty()) {
    report.coverage[source] = 0.0;
    return;
  }
  std::set<std::chrono::sys_days> seen;
  for (const auto& d : days) {
    if (!seen.insert(std::chrono::sys_days{d.date}).second) {
      report.findings.push_back({"duplicate", source, format_date(d.date)});
    }
  }
  auto first = *seen.begin();
  auto last = *seen.rbegin();
  std::size_t expected = static_cast<std::size_t>((last - first).count()) + 1;
  for (auto day = first; day <= last; day += std::chrono::days{1}) {
    if (!seen.count(day)) report.findings.push_back({"gap", source, format_date(Date{day})});
  }
  report.coverage[source] = static_cast<double>(seen.size()) / static_cast<double>(expected);
}

}  // namespace

ValidationReport validate_dataset(const RawDataset& data) {
  ValidationReport report;

  // Stations: one record per (station, week); weeks contiguous per station.
  std::map<std::string, std::set<IsoWeek>> weeks_by_station;
  for (const auto& r : data.stations) {
    if (!weeks_by_station[r.station_id].insert(r.week).second) {
      report.findings.push_back({"duplicate", "stations", r.station_id + " " + format_iso_week(r.week)});
    }
  }
  std::size_t present = 0, expected = 0;
  for (const auto& [station, weeks] : weeks_by_station) {
    for (IsoWeek w = *weeks.begin();; w = next_week(w)) {
      ++expected;
      if (weeks.count(w)) {
        ++present;
      } else {
        report.findings.push_back({"gap", "stations", station + " " + format_iso_week(w)});
      }
      if (w == *weeks.rbegin()) break;
    }
  }
  report.coverage["stations"] = expected ? static_cast<double>(present) / static_cast<double>(expected) : 0.0;

  check_daily(data.meteo, "meteo", report);
  check_daily(data.upwelling, "upwelling", report);

  // Status: every Monday in each zone's span must carry a record.
  std::map<std::string, std::set<std::chrono::sys_days>> days_by_zone;
  for (const auto& d : data.status) {
    if (!days_by_zone[d.zone_id].insert(std::chrono::sys_days{d.date}).second) {
      report.findings.push_back({"duplicate", "status", d.zone_id + " " + format_date(d.date)});
    }
  }
  std::size_t mondays = 0, mondays_present = 0;
  for (const auto& [zone, days] : days_by_zone) {
    auto first = *days.begin();
    auto last = *days.rbegin();
    auto monday = first;
    while (std::chrono::weekday{monday} != std::chrono::Monday) monday += std::chrono::days{1};
    for (; monday <= last; monday += std::chrono::days{7}) {
      ++mondays;
      if (days.count(monday)) {
        ++mondays_present;
      } else {
        report.findings.push_back({"gap", "status", zone + " " + format_date(Date{monday})});
      }
    }
  }
  report.coverage["status"] = mondays ? static_cast<double>(mondays_present) / static_cast<double>(mondays) : 0.0;
  return report;
}

// ---------------------------------------------------------------------------
// Binary container
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint32_t kDatasetMagic = 0x48414244;  // "HABD"
constexpr std::uint32_t kDatasetVersion = 1;

struct DateCodec {
  std::int32_t y{};
  std::uint8_t m{}, d{};
  template <class Archive>
  void serialize(Archive& ar) {
    ar(y, m, d);
  }
};

DateCodec encode_date(Date d) {
  return {static_cast<std::int32_t>(static_cast<int>(d.year())), static_cast<std::uint8_t>(unsigned(d.month())),
          static_cast<std::uint8_t>(unsigned(d.day()))};
}

Date decode_date(const DateCodec& c) {
  return Date{std::chrono::year{c.y}, std::chrono::month{c.m}, std::chrono::day{c.d}};
}

}  // namespace

template <class Archive>
void serialize(Archive& ar, DepthSample& s) {
  ar(s.depth_m, s.temperature_c, s.salinity_psu, s.oxygen_mgl);
}

template <class Archive>
void serialize(Archive& ar, StationWeekRecord& r) {
  ar(r.station_id, r.week.year, r.week.week, r.profile, r.chl_band_0_5, r.chl_band_5_10, r.chl_band_10_15,
     r.dinophysis_cells, r.ammonium, r.phosphate, r.nitrate, r.nitrite);
}

template <class Archive>
void save(Archive& ar, const MeteoDay& d) {
  ar(encode_date(d.date), d.solar_irradiation, d.sunshine_hours, d.insolation);
}
template <class Archive>
void load(Archive& ar, MeteoDay& d) {
  DateCodec c;
  ar(c, d.solar_irradiation, d.sunshine_hours, d.insolation);
  d.date = decode_date(c);
}

template <class Archive>
void save(Archive& ar, const UpwellingDay& d) {
  ar(encode_date(d.date), d.values_4x);
}
template <class Archive>
void load(Archive& ar, UpwellingDay& d) {
  DateCodec c;
  ar(c, d.values_4x);
  d.date = decode_date(c);
}

template <class Archive>
void save(Archive& ar, const ZoneStatusDay& d) {
  ar(d.zone_id, encode_date(d.date), static_cast<std::uint8_t>(d.status));
}
template <class Archive>
void load(Archive& ar, ZoneStatusDay& d) {
  DateCodec c;
  std::uint8_t s = 0;
  ar(d.zone_id, c, s);
  d.date = decode_date(c);
  if (s > 1) throw Error(ErrorKind::Io, "corrupt dataset: invalid status byte");
  d.status = static_cast<Status>(s);
}

void save_dataset(const std::filesystem::path& path, const RawDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  cereal::PortableBinaryOutputArchive ar(out);
  ar(kDatasetMagic, kDatasetVersion, data.stations, data.meteo, data.upwelling, data.status);
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

RawDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  RawDataset data;
  try {
    cereal::PortableBinaryInputArchive ar(in);
    std::uint32_t magic = 0, version = 0;
    ar(magic, version);
    if (magic != kDatasetMagic) throw Error(ErrorKind::Io, "'" + path.string() + "' is not a habgate dataset");
    if (version != kDatasetVersion) {
      throw Error(ErrorKind::Io, "unsupported dataset version " + std::to_string(version));
    }
    ar(data.stations, data.meteo, data.upwelling, data.status);
  } catch (const cereal::Exception& e) {
    throw Error(ErrorKind::Io, "corrupt dataset '" + path.string() + "': " + e.what());
  }
  return data;
}

}  // namespace habgate::ingest
