#include "habgate/synth.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace habgate::synth {

using nlohmann::json;

const std::map<std::string, double>& default_closure_rates() {
  static const std::map<std::string, double> rates{
      {"CangasF", 0.48},    {"CangasG", 0.46},    {"CangasH", 0.41},    {"CangasC", 0.29},
      {"CangasD", 0.29},    {"CangasE", 0.16},    {"VigoA", 0.24},      {"RedondelaA", 0.10},
      {"RedondelaB", 0.05}, {"RedondelaC", 0.04}, {"RedondelaD", 0.06}, {"RedondelaE", 0.10}};
  return rates;
}

void GeneratorConfig::validate() const {
  auto rate = [](double v, const std::string& what) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::InvalidArgument, what + " must be in [0, 1]");
  };
  if (n_years < 1) throw Error(ErrorKind::InvalidArgument, "n_years must be at least 1");
  if (stations.empty() || zones.empty()) throw Error(ErrorKind::InvalidArgument, "stations and zones must be non-empty");
  rate(missing_stations, "missing_stations");
  rate(missing_meteo, "missing_meteo");
  rate(missing_upwelling, "missing_upwelling");
  rate(label_noise, "label_noise");
  if (label_noise >= 1.0) throw Error(ErrorKind::InvalidArgument, "label_noise must be below 1");
  if (!(anomaly_memory >= 0.0 && anomaly_memory < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "anomaly_memory must be in [0, 1)");
  }
  if (!(persistence >= 0.0 && persistence < 1.0)) throw Error(ErrorKind::InvalidArgument, "persistence must be in [0, 1)");
  if (!(toxicity_noise >= 0.0)) throw Error(ErrorKind::InvalidArgument, "toxicity_noise must be non-negative");
  if (!(bloom_intensity >= 0.0)) throw Error(ErrorKind::InvalidArgument, "bloom_intensity must be non-negative");
  for (const auto& z : zones) {
    auto it = closure_rates.find(z);
    if (it == closure_rates.end()) throw Error(ErrorKind::InvalidArgument, "no closure rate for zone " + z);
    rate(it->second, "closure rate of " + z);
  }
}

GeneratorConfig config_from_key_values(const KeyValues& kv) {
  GeneratorConfig c;
  c.seed = kv.get_u64("seed", c.seed);
  c.n_years = static_cast<int>(kv.get_int("years", c.n_years));
  c.start_year = static_cast<int>(kv.get_int("start_year", c.start_year));
  c.stations = kv.get_list("stations", c.stations);
  c.zones = kv.get_list("zones", c.zones);
  c.missing_stations = kv.get_double("missing_stations", c.missing_stations);
  c.missing_meteo = kv.get_double("missing_meteo", c.missing_meteo);
  c.missing_upwelling = kv.get_double("missing_upwelling", c.missing_upwelling);
  if (kv.has("missingness_rate")) {
    const double r = kv.get_double("missingness_rate", 0.0);
    c.missing_stations = c.missing_meteo = c.missing_upwelling = r;
  }
  c.bloom_intensity = kv.get_double("bloom_intensity", c.bloom_intensity);
  c.label_noise = kv.get_double("label_noise", c.label_noise);
  c.anomaly_memory = kv.get_double("anomaly_memory", c.anomaly_memory);
  c.persistence = kv.get_double("persistence", c.persistence);
  c.toxicity_noise = kv.get_double("toxicity_noise", c.toxicity_noise);
  for (const auto& z : c.zones) {
    if (kv.has("closure." + z)) c.closure_rates[z] = kv.get_double("closure." + z, 0.0);
  }
  c.validate();
  return c;
}

KeyValues to_key_values(const GeneratorConfig& c) {
  auto num = [](double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
  };
  KeyValues kv;
  kv.set("seed", std::to_string(c.seed));
  kv.set("years", std::to_string(c.n_years));
  kv.set("start_year", std::to_string(c.start_year));
  kv.set("stations", join(c.stations));
  kv.set("zones", join(c.zones));
  kv.set("missing_stations", num(c.missing_stations));
  kv.set("missing_meteo", num(c.missing_meteo));
  kv.set("missing_upwelling", num(c.missing_upwelling));
  kv.set("bloom_intensity", num(c.bloom_intensity));
  kv.set("label_noise", num(c.label_noise));
  kv.set("anomaly_memory", num(c.anomaly_memory));
  kv.set("persistence", num(c.persistence));
  kv.set("toxicity_noise", num(c.toxicity_noise));
  for (const auto& z : c.zones) kv.set("closure." + z, num(c.closure_rates.at(z)));
  return kv;
}

namespace {

constexpr double kYear = 52.1775;

double cycle(int week, double peak_week) { return std::cos(2.0 * std::numbers::pi * (week - peak_week) / kYear); }

double round_to(double v, double step) {
  const double inv = std::round(1.0 / step);
  return std::round(v * inv) / inv;
}

// Independent random streams, so adding draws to one source leaves the others unchanged.
enum Stream : std::uint64_t { kDrivers = 1, kStations, kMeteo, kUpwelling, kToxicity, kNoise, kMissing };

/// Marks exactly `count` of the candidates, chosen uniformly.
std::vector<bool> choose(std::size_t n, const std::vector<std::size_t>& candidates, std::size_t count, Rng& rng) {
  std::vector<std::size_t> pool = candidates;
  rng.shuffle(pool);
  std::vector<bool> out(n, false);
  for (std::size_t i = 0; i < std::min(count, pool.size()); ++i) out[pool[i]] = true;
  return out;
}

}  // namespace

Generated generate(const GeneratorConfig& config) {
  config.validate();
  Generated g;
  auto& latent = g.latent;

  for (int y = config.start_year; y < config.start_year + config.n_years; ++y) {
    for (int w = 1; w <= iso_weeks_in_year(y); ++w) latent.weeks.push_back({y, w});
  }
  const std::size_t n_weeks = latent.weeks.size();

  // Weekly drivers: temperature season, upwelling, run-off, bloom.
  Rng drv(mix_seed(config.seed, kDrivers));
  std::vector<double> season(n_weeks), upwelling(n_weeks), runoff(n_weeks);
  latent.bloom.resize(n_weeks);
  double u = 0.0, b = 0.0;
  for (std::size_t t = 0; t < n_weeks; ++t) {
    const int wk = latent.weeks[t].week;
    season[t] = cycle(wk, 30.0);
    u = 0.6 * u + 0.4 * (0.8 * cycle(wk, 26.0)) + 0.45 * drv.normal();
    upwelling[t] = u;
    runoff[t] = std::max(0.0, cycle(wk, 2.0) + 0.5 * drv.normal());
    const double prev_u = t ? upwelling[t - 1] : 0.0;
    b = 0.75 * b + 0.25 * config.bloom_intensity * 1.6 * cycle(wk, 38.0) + 0.25 * prev_u + 0.35 * drv.normal();
    latent.bloom[t] = b;
  }

  // Station records.
  Rng st(mix_seed(config.seed, kStations));
  const std::array<double, 6> depths{0.0, 3.0, 6.0, 9.0, 12.0, 15.0};
  // Slowly varying station anomalies (weekly AR(1), unit variance).
  std::vector<std::array<double, 8>> anomaly(config.stations.size(), std::array<double, 8>{});
  const double phi = config.anomaly_memory;
  const double innovation = std::sqrt(1.0 - phi * phi);
  for (std::size_t t = 0; t < n_weeks; ++t) {
    for (std::size_t s = 0; s < config.stations.size(); ++s) {
      auto& an = anomaly[s];
      for (auto& a : an) a = t == 0 ? st.normal() : phi * a + innovation * st.normal();
      // Outer stations (lower index) see more of the shelf signal.
      const double exposure = 1.0 - 0.08 * static_cast<double>(s);
      const double bl = latent.bloom[t], up = upwelling[t];
      ingest::StationWeekRecord r;
      r.station_id = config.stations[s];
      r.week = latent.weeks[t];
      const double surface = 14.0 + 2.8 * season[t] - 1.1 * up * exposure + 0.35 * an[0];
      const double gradient = std::max(0.0, 0.6 + 1.4 * std::max(0.0, season[t]) - 0.7 * std::max(0.0, up));
      const double sal_surface = 35.6 - 0.9 * runoff[t] * (1.2 - exposure) * 2.0 + 0.15 * up + 0.12 * an[1];
      for (double d : depths) {
        const double temp = surface - gradient * d / 12.0 + 0.12 * st.normal();
        const double sal = sal_surface + 0.06 * d + 0.04 * st.normal();
        const double oxy = 7.6 - 0.18 * (temp - 13.0) + 0.35 * bl - 0.25 * d / 12.0 + 0.15 * st.normal();
        r.profile.push_back({d, round_to(temp, 0.01), round_to(sal, 0.01), round_to(oxy, 0.01)});
      }
      const double chl = std::exp(0.4 + 0.45 * bl + 0.3 * up + 0.3 * an[2]);
      r.chl_band_0_5 = round_to(chl * (1.0 + 0.1 * st.normal()), 0.001);
      r.chl_band_5_10 = round_to(chl * 0.8 * (1.0 + 0.1 * st.normal()), 0.001);
      r.chl_band_10_15 = round_to(chl * 0.5 * (1.0 + 0.1 * st.normal()), 0.001);
      r.dinophysis_cells = std::round(std::exp(4.0 + 1.3 * bl * exposure + 0.35 * an[3] + 0.2 * st.normal()));
      r.ammonium = round_to(std::max(0.01, 1.2 + 0.4 * up + 0.3 * bl + 0.3 * an[4]), 0.001);
      r.phosphate = round_to(std::max(0.01, 0.45 + 0.2 * up - 0.05 * bl + 0.08 * an[5]), 0.001);
      r.nitrate = round_to(std::max(0.01, 3.0 + 2.2 * up - 0.9 * bl + 0.7 * an[6]), 0.001);
      r.nitrite = round_to(std::max(0.001, 0.25 + 0.1 * up + 0.06 * an[7]), 0.001);
      g.data.stations.push_back(std::move(r));
    }
  }

  // Daily meteorology and upwelling readings.
  Rng met(mix_seed(config.seed, kMeteo));
  Rng upw(mix_seed(config.seed, kUpwelling));
  for (std::size_t t = 0; t < n_weeks; ++t) {
    const Date monday = monday_of(latent.weeks[t]);
    const int wk = latent.weeks[t].week;
    const double daylength = 12.2 + 3.2 * cycle(wk, 25.0);
    for (int d = 0; d < 7; ++d) {
      ingest::MeteoDay m;
      m.date = add_days(monday, d);
      const double clouds = std::clamp(0.45 - 0.25 * season[t] + 0.25 * met.normal(), 0.0, 1.0);
      m.sunshine_hours = round_to(daylength * (1.0 - clouds), 0.1);
      m.insolation = round_to(1.0 - clouds, 0.001);
      m.solar_irradiation = round_to(std::max(5.0, (60.0 + 22.0 * daylength) * (1.0 - 0.7 * clouds)), 0.1);
      g.data.meteo.push_back(m);

      ingest::UpwellingDay uday;
      uday.date = m.date;
      const double daily = upwelling[t] + 0.35 * upw.normal();
      for (auto& v : uday.values_4x) v = round_to(900.0 * (daily + 0.1 * upw.normal()), 0.1);
      g.data.upwelling.push_back(uday);
    }
  }

  // Zone toxicity on Mondays (h even) and Fridays (h odd); h = 2 * n_weeks is
  // the Monday after the last week.
  Rng tox(mix_seed(config.seed, kToxicity));
  Rng noise(mix_seed(config.seed, kNoise));
  const std::size_t n_half = 2 * n_weeks + 1;
  const double rho = config.persistence;
  for (std::size_t zi = 0; zi < config.zones.size(); ++zi) {
    const auto& zone = config.zones[zi];
    const double exposure = 0.9 + 0.3 * tox.uniform();
    std::vector<double> level(n_half);
    double v = 0.0;
    for (std::size_t h = 0; h < n_half; ++h) {
      const std::size_t t = h == 0 ? 0 : (h - 1) / 2;
      v = rho * v + (1.0 - rho) * exposure * latent.bloom[t] + config.toxicity_noise * tox.normal();
      level[h] = v;
    }

    // Threshold on Monday labels (h = 2t + 2) hitting the latent fraction exactly.
    const double target = config.closure_rates.at(zone);
    const double latent_rate = target * (1.0 - config.label_noise);
    std::vector<double> mondays;
    for (std::size_t t = 0; t < n_weeks; ++t) mondays.push_back(level[2 * t + 2]);
    std::vector<double> sorted = mondays;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const auto n_closed = static_cast<std::size_t>(std::llround(latent_rate * static_cast<double>(n_weeks)));
    double theta;
    if (n_closed == 0) {
      theta = sorted.front() + 1.0;
    } else if (n_closed >= n_weeks) {
      theta = sorted.back() - 1.0;
    } else {
      theta = 0.5 * (sorted[n_closed - 1] + sorted[n_closed]);
    }
    latent.thresholds[zone] = theta;

    std::vector<Status> latent_status(n_half), observed(n_half);
    for (std::size_t h = 0; h < n_half; ++h) latent_status[h] = level[h] > theta ? Status::Closed : Status::Open;
    observed = latent_status;

    // Precautionary closures: a share label_noise of observed closures is spurious.
    const double p = config.label_noise;
    for (int parity = 0; parity < 2; ++parity) {
      std::vector<std::size_t> open_slots;
      std::size_t closed = 0;
      for (std::size_t h = 0; h < n_half; ++h) {
        if (h % 2 != static_cast<std::size_t>(parity)) continue;
        if (latent_status[h] == Status::Closed) {
          ++closed;
        } else {
          open_slots.push_back(h);
        }
      }
      const auto flips = static_cast<std::size_t>(std::llround(p / (1.0 - p) * static_cast<double>(closed)));
      const auto mark = choose(n_half, open_slots, flips, noise);
      for (std::size_t h = 0; h < n_half; ++h) {
        if (mark[h]) observed[h] = Status::Closed;
      }
    }

    auto& lm = latent.latent_monday[zone];
    auto& om = latent.observed_monday[zone];
    for (std::size_t t = 0; t < n_weeks; ++t) {
      lm.push_back(latent_status[2 * t + 2]);
      om.push_back(observed[2 * t + 2]);
    }
    for (std::size_t h = 0; h < n_half; ++h) {
      const std::size_t t = h / 2;
      const Date day = h == 2 * n_weeks ? monday_of(next_week(latent.weeks.back()))
                                        : (h % 2 == 0 ? monday_of(latent.weeks[t]) : friday_of(latent.weeks[t]));
      g.data.status.push_back({zone, day, observed[h]});
    }
  }

  // Outages. One permutation of the weeks is cut into consecutive runs, one per source.
  Rng miss(mix_seed(config.seed, kMissing));
  std::vector<std::size_t> perm(n_weeks);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  miss.shuffle(perm);
  auto count_for = [&](double r) { return static_cast<std::size_t>(std::llround(r * static_cast<double>(n_weeks))); };
  const std::size_t n_st = count_for(config.missing_stations);
  const std::size_t n_met = count_for(config.missing_meteo);
  const std::size_t n_up = count_for(config.missing_upwelling);
  std::size_t cursor = 0;
  auto take = [&](std::size_t count) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(perm[(cursor + i) % n_weeks]);
    cursor += count;
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto st_out = take(n_st);
  const auto met_out = take(n_met);
  const auto up_out = take(n_up);

  const std::size_t n_stations = config.stations.size();
  for (auto t : st_out) {
    const std::size_t affected = 1 + miss.below(2);
    for (std::size_t i = 0; i < affected; ++i) {
      auto& r = g.data.stations[t * n_stations + miss.below(n_stations)];
      if (miss.bernoulli(0.5)) {
        // Station not sampled that week.
        r.profile.clear();
        r.chl_band_0_5 = r.chl_band_5_10 = r.chl_band_10_15 = std::nullopt;
        r.dinophysis_cells = r.ammonium = r.phosphate = r.nitrate = r.nitrite = std::nullopt;
      } else {
        // Nutrient analysis lost.
        r.ammonium = r.phosphate = r.nitrate = r.nitrite = std::nullopt;
      }
    }
  }
  for (auto t : met_out) {
    const auto field = miss.below(3);
    for (int d = 0; d < 7; ++d) {
      auto& m = g.data.meteo[t * 7 + static_cast<std::size_t>(d)];
      (field == 0 ? m.solar_irradiation : field == 1 ? m.sunshine_hours : m.insolation) = std::nullopt;
    }
  }
  for (auto t : up_out) {
    for (int d = 0; d < 7; ++d) {
      for (auto& v : g.data.upwelling[t * 7 + static_cast<std::size_t>(d)].values_4x) v = std::nullopt;
    }
  }
  return g;
}

void write_dataset(const std::filesystem::path& dir, const ingest::RawDataset& data) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + (dir / name).string() + "'");
    return out;
  };
  {
    auto out = open("stations.csv");
    ingest::write_station_csv(out, data.stations);
  }
  {
    auto out = open("meteo.csv");
    ingest::write_meteo_csv(out, data.meteo);
  }
  {
    auto out = open("upwelling.csv");
    ingest::write_upwelling_csv(out, data.upwelling);
  }
  {
    auto out = open("status.csv");
    ingest::write_zone_status_csv(out, data.status);
  }
}

std::vector<ZoneBound> bayes_reference(const LatentState& latent, const std::vector<std::string>& zones) {
  std::vector<ZoneBound> out;
  for (const auto& z : zones) {
    const auto& lat = latent.latent_monday.at(z);
    const auto& obs = latent.observed_monday.at(z);
    std::size_t tp = 0, fn = 0, correct = 0, n_lat = 0, n_obs = 0;
    for (std::size_t i = 0; i < lat.size(); ++i) {
      const bool pc = lat[i] == Status::Closed, oc = obs[i] == Status::Closed;
      if (oc) (pc ? tp : fn)++;
      correct += pc == oc;
      n_lat += pc;
      n_obs += oc;
    }
    const double n = static_cast<double>(lat.size());
    ZoneBound b;
    b.zone_id = z;
    b.sensitivity = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
    b.accuracy = n > 0 ? static_cast<double>(correct) / n : 1.0;
    b.closure_fraction = n > 0 ? static_cast<double>(n_obs) / n : 0.0;
    b.latent_fraction = n > 0 ? static_cast<double>(n_lat) / n : 0.0;
    out.push_back(b);
  }
  return out;
}

std::vector<ZoneBound> bayes_reference(const GeneratorConfig& config) {
  return bayes_reference(generate(config).latent, config.zones);
}

json to_json(const std::vector<ZoneBound>& bounds) {
  json zones = json::array();
  for (const auto& b : bounds) {
    zones.push_back({{"zone_id", b.zone_id},
                     {"sensitivity", b.sensitivity},
                     {"accuracy", b.accuracy},
                     {"closure_fraction", b.closure_fraction},
                     {"latent_fraction", b.latent_fraction}});
  }
  return {{"zones", zones}};
}

}  // namespace habgate::synth
