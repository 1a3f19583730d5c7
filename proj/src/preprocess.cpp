#include "habgate/preprocess.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace habgate::preprocess {

namespace {

constexpr double kRopeDepth = 12.0;
constexpr double kUpperLayer = 6.0;

const ingest::Value& field_of(const ingest::DepthSample& s, ProfileField f) {
  switch (f) {
    case ProfileField::Temperature: return s.temperature_c;
    case ProfileField::Salinity: return s.salinity_psu;
    case ProfileField::Oxygen: return s.oxygen_mgl;
  }
  return s.temperature_c;
}

const ingest::Value& field_of(const ingest::MeteoDay& d, MeteoField f) {
  switch (f) {
    case MeteoField::SolarIrradiation: return d.solar_irradiation;
    case MeteoField::SunshineHours: return d.sunshine_hours;
    case MeteoField::Insolation: return d.insolation;
  }
  return d.solar_irradiation;
}

template <typename Pred>
std::optional<double> mean_where(std::span<const ingest::DepthSample> profile, ProfileField field, Pred keep) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : profile) {
    const auto& v = field_of(s, field);
    if (v && keep(s.depth_m)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

double chlorophyll_weekly(const ingest::StationWeekRecord& record) {
  std::optional<double> best;
  for (const auto* band : {&record.chl_band_0_5, &record.chl_band_5_10, &record.chl_band_10_15}) {
    if (*band && (!best || **band > *best)) best = **band;
  }
  if (!best) throw Error(ErrorKind::AllMissing, "no chlorophyll band present for " + record.station_id);
  return *best;
}

double column_mean_0_12(std::span<const ingest::DepthSample> profile, ProfileField field) {
  auto m = mean_where(profile, field, [](double d) { return d <= kRopeDepth; });
  if (!m) throw Error(ErrorKind::AllMissing, "no profile value at or above 12 m");
  return *m;
}

double stratification_differential(std::span<const ingest::DepthSample> profile, ProfileField field) {
  auto upper = mean_where(profile, field, [](double d) { return d <= kUpperLayer; });
  auto lower = mean_where(profile, field, [](double d) { return d > kUpperLayer && d <= kRopeDepth; });
  if (!upper) throw Error(ErrorKind::BandMissing, "no profile value in the 0-6 m band");
  if (!lower) throw Error(ErrorKind::BandMissing, "no profile value in the 6-12 m band");
  return *upper - *lower;
}

double weekly_mean_daily(std::span<const ingest::MeteoDay> days, IsoWeek week, MeteoField field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& d : days) {
    const auto& v = field_of(d, field);
    if (v && iso_week_of(d.date) == week) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorKind::AllMissing, "no daily value in " + format_iso_week(week));
  return sum / static_cast<double>(n);
}

double weekly_mean_daily(std::span<const ingest::UpwellingDay> days, IsoWeek week) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& d : days) {
    if (iso_week_of(d.date) != week) continue;
    for (const auto& v : d.values_4x) {
      if (v) {
        sum += *v;
        ++n;
      }
    }
  }
  if (n == 0) throw Error(ErrorKind::AllMissing, "no upwelling reading in " + format_iso_week(week));
  return sum / static_cast<double>(n);
}

int seasonality(Date date) { return iso_week_of(date).week; }

Status monday_label(std::span<const ingest::ZoneStatusDay> history, const std::string& zone, IsoWeek week) {
  const Date monday = monday_of(next_week(week));
  for (const auto& d : history) {
    if (d.date == monday && d.zone_id == zone) return d.status;
  }
  throw Error(ErrorKind::LabelMissing, "no status for " + zone + " on " + format_date(monday));
}

namespace {

// Per-station variables in canonical column order.
enum class StationVar {
  TemperatureMean,
  Thermocline,
  Halocline,
  SalinityMean,
  OxygenMean,
  Chlorophyll,
  Dinophysis,
  Ammonium,
  Phosphate,
  Nitrate,
  Nitrite,
};

struct VarName {
  StationVar var;
  const char* name;
};

std::vector<VarName> station_vars(bool halocline) {
  std::vector<VarName> v{{StationVar::TemperatureMean, "temperature_mean"}, {StationVar::Thermocline, "thermocline"}};
  if (halocline) v.push_back({StationVar::Halocline, "halocline"});
  v.insert(v.end(), {{StationVar::SalinityMean, "salinity_mean"},
                     {StationVar::OxygenMean, "oxygen_mean"},
                     {StationVar::Chlorophyll, "chlorophyll"},
                     {StationVar::Dinophysis, "dinophysis"},
                     {StationVar::Ammonium, "ammonium"},
                     {StationVar::Phosphate, "phosphate"},
                     {StationVar::Nitrate, "nitrate"},
                     {StationVar::Nitrite, "nitrite"}});
  return v;
}

std::vector<std::string> names_for(const std::vector<std::string>& stations, bool halocline) {
  std::vector<std::string> names;
  for (const auto& [var, name] : station_vars(halocline)) {
    for (const auto& s : stations) names.push_back(s + "_" + name);
  }
  for (const char* n : {"solar_irradiation", "sunshine_hours", "insolation", "upwelling_index", "week_of_year",
                        "friday_status"}) {
    names.emplace_back(n);
  }
  return names;
}

template <typename F>
double or_missing(F&& compute) {
  try {
    return compute();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::AllMissing || e.kind() == ErrorKind::BandMissing) return kMissing;
    throw;
  }
}

double station_value(const ingest::StationWeekRecord& r, StationVar var) {
  auto opt = [](const ingest::Value& v) { return v ? *v : kMissing; };
  switch (var) {
    case StationVar::TemperatureMean:
      return or_missing([&] { return column_mean_0_12(r.profile, ProfileField::Temperature); });
    case StationVar::Thermocline:
      return or_missing([&] { return stratification_differential(r.profile, ProfileField::Temperature); });
    case StationVar::Halocline:
      return or_missing([&] { return stratification_differential(r.profile, ProfileField::Salinity); });
    case StationVar::SalinityMean:
      return or_missing([&] { return column_mean_0_12(r.profile, ProfileField::Salinity); });
    case StationVar::OxygenMean:
      return or_missing([&] { return column_mean_0_12(r.profile, ProfileField::Oxygen); });
    case StationVar::Chlorophyll: return or_missing([&] { return chlorophyll_weekly(r); });
    case StationVar::Dinophysis: return opt(r.dinophysis_cells);
    case StationVar::Ammonium: return opt(r.ammonium);
    case StationVar::Phosphate: return opt(r.phosphate);
    case StationVar::Nitrate: return opt(r.nitrate);
    case StationVar::Nitrite: return opt(r.nitrite);
  }
  return kMissing;
}

}  // namespace

std::vector<std::string> feature_names(const std::vector<std::string>& stations) { return names_for(stations, false); }

DesignMatrix assemble_zone_matrix(const ingest::RawDataset& data, const std::string& zone,
                                  const AssemblyOptions& options) {
  DesignMatrix m;
  m.zone_id = zone;
  m.feature_names = names_for(options.stations, options.include_halocline);
  if (data.stations.empty()) return m;

  std::map<std::pair<std::string, IsoWeek>, const ingest::StationWeekRecord*> station_index;
  IsoWeek first = data.stations.front().week, last = first;
  for (const auto& r : data.stations) {
    station_index.emplace(std::make_pair(r.station_id, r.week), &r);
    first = std::min(first, r.week);
    last = std::max(last, r.week);
  }
  std::map<IsoWeek, std::vector<ingest::MeteoDay>> meteo_by_week;
  for (const auto& d : data.meteo) meteo_by_week[iso_week_of(d.date)].push_back(d);
  std::map<IsoWeek, std::vector<ingest::UpwellingDay>> upwelling_by_week;
  for (const auto& d : data.upwelling) upwelling_by_week[iso_week_of(d.date)].push_back(d);
  std::map<std::chrono::sys_days, Status> zone_status;
  for (const auto& d : data.status) {
    if (d.zone_id == zone) zone_status[std::chrono::sys_days{d.date}] = d.status;
  }

  const auto vars = station_vars(options.include_halocline);
  std::vector<double> row;
  std::size_t unlabeled = 0;
  for (IsoWeek w = first;; w = next_week(w)) {
    auto label_it = zone_status.find(std::chrono::sys_days{monday_of(next_week(w))});
    if (label_it == zone_status.end()) {
      ++unlabeled;
    } else {
      row.clear();
      for (const auto& v : vars) {
        for (const auto& s : options.stations) {
          auto it = station_index.find({s, w});
          row.push_back(it == station_index.end() ? kMissing : station_value(*it->second, v.var));
        }
      }
      const auto& met = meteo_by_week[w];
      for (auto f : {MeteoField::SolarIrradiation, MeteoField::SunshineHours, MeteoField::Insolation}) {
        row.push_back(or_missing([&] { return weekly_mean_daily(met, w, f); }));
      }
      row.push_back(or_missing([&] { return weekly_mean_daily(upwelling_by_week[w], w); }));
      row.push_back(static_cast<double>(seasonality(monday_of(w))));
      auto friday = zone_status.find(std::chrono::sys_days{friday_of(w)});
      row.push_back(friday == zone_status.end() ? kMissing : encode(friday->second));
      m.append_row(row, label_it->second, w);
    }
    if (w == last) break;
  }
  if (unlabeled > 0) {
    std::cerr << "warning: " << zone << ": " << unlabeled << " week(s) skipped without a Monday label\n";
  }
  return m;
}

DesignMatrix drop_null_rows(const DesignMatrix& matrix) {
  DesignMatrix out;
  out.zone_id = matrix.zone_id;
  out.feature_names = matrix.feature_names;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    if (!matrix.is_null_row(r)) out.append_row(matrix.row(r), matrix.labels[r], matrix.weeks[r]);
  }
  if (out.rows() == 0 && matrix.rows() > 0) {
    std::cerr << "warning: " << matrix.zone_id << ": every row has missing values; matrix is empty\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

namespace {

template <typename Source>
Scaler fit_impl(const Source& src, std::size_t rows, std::size_t cols) {
  Scaler s;
  s.min.assign(cols, 0.0);
  s.max.assign(cols, 0.0);
  if (rows == 0) throw Error(ErrorKind::EmptyMatrix, "cannot fit a scaler on zero rows");
  for (std::size_t c = 0; c < cols; ++c) {
    double lo = src.at(0, c), hi = lo;
    for (std::size_t r = 1; r < rows; ++r) {
      double v = src.at(r, c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    s.min[c] = lo;
    s.max[c] = hi;
  }
  return s;
}

}  // namespace

Scaler minmax_fit(const DataView& train) { return fit_impl(train, train.rows(), train.cols()); }
Scaler minmax_fit(const Dense& train) { return fit_impl(train, train.n_rows, train.n_cols); }

void minmax_apply(const Scaler& scaler, Dense& rows) {
  if (rows.n_cols != scaler.size()) throw Error(ErrorKind::FeatureMismatch, "scaler arity mismatch");
  for (std::size_t r = 0; r < rows.n_rows; ++r)
    for (std::size_t c = 0; c < rows.n_cols; ++c) rows.at(r, c) = scaler.apply(c, rows.at(r, c));
}

std::vector<double> minmax_apply(const Scaler& scaler, std::span<const double> row) {
  if (row.size() != scaler.size()) throw Error(ErrorKind::FeatureMismatch, "scaler arity mismatch");
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) out[c] = scaler.apply(c, row[c]);
  return out;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

void save_matrix(const std::filesystem::path& dir, const DesignMatrix& matrix) {
  std::filesystem::create_directories(dir);
  const auto csv_path = dir / (matrix.zone_id + ".csv");
  std::ofstream out(csv_path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + csv_path.string() + "'");
  out << "week";
  for (const auto& n : matrix.feature_names) out << ',' << n;
  out << ",label\n";
  char buf[32];
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out << format_iso_week(matrix.weeks[r]);
    for (double v : matrix.row(r)) {
      out << ',';
      if (!is_missing(v)) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, ptr - buf);
      }
    }
    out << ',' << (matrix.labels[r] == Status::Closed ? 1 : 0) << '\n';
  }

  const auto mask = matrix.null_mask();
  nlohmann::json manifest{{"format", "habgate-matrix"},
                          {"version", 1},
                          {"zone", matrix.zone_id},
                          {"feature_names", matrix.feature_names},
                          {"label_column", "label"},
                          {"label_encoding", {{"OPEN", 0}, {"CLOSED", 1}}},
                          {"rows", matrix.rows()},
                          {"null_rows", std::count(mask.begin(), mask.end(), true)}};
  std::ofstream side(dir / (matrix.zone_id + ".json"));
  side << manifest.dump(2) << '\n';
}

DesignMatrix load_matrix(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + csv_path.string() + "'");
  DesignMatrix m;
  m.zone_id = csv_path.stem().string();
  auto side_path = csv_path;
  side_path.replace_extension(".json");
  if (std::filesystem::exists(side_path)) {
    std::ifstream side(side_path);
    auto manifest = nlohmann::json::parse(side);
    m.zone_id = manifest.at("zone").get<std::string>();
  }

  std::string line;
  if (!std::getline(in, line)) throw MalformedRow(1, 1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header.front() != "week" || header.back() != "label") {
    throw MalformedRow(1, 1, "matrix header must be week,<features...>,label");
  }
  m.feature_names.assign(header.begin() + 1, header.end() - 1);

  std::size_t ln = 1;
  std::vector<double> row(m.cols());
  while (std::getline(in, line)) {
    ++ln;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view sv(line);
    std::size_t start = 0;
    for (;;) {
      auto pos = sv.find(',', start);
      cells.push_back(sv.substr(start, pos == std::string_view::npos ? sv.npos : pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    if (cells.size() != header.size()) throw MalformedRow(ln, cells.size(), "wrong number of cells");
    IsoWeek week;
    try {
      week = parse_iso_week(cells[0]);
    } catch (const Error&) {
      throw MalformedRow(ln, 1, "invalid ISO week");
    }
    for (std::size_t c = 0; c < m.cols(); ++c) {
      auto cell = cells[c + 1];
      if (cell.empty()) {
        row[c] = kMissing;
        continue;
      }
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), row[c]);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) throw MalformedRow(ln, c + 2, "not a number");
    }
    auto lab = cells.back();
    if (lab != "0" && lab != "1") throw MalformedRow(ln, header.size(), "label must be 0 or 1");
    m.append_row(row, lab == "1" ? Status::Closed : Status::Open, week);
  }
  return m;
}

}  // namespace habgate::preprocess
