#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "habgate/models/knn.hpp"
#include "habgate/preprocess.hpp"
#include "habgate/synth.hpp"
#include "support.hpp"

using namespace habgate;
using namespace habgate::preprocess;
using ingest::DepthSample;

namespace {

ingest::StationWeekRecord chl(ingest::Value a, ingest::Value b, ingest::Value c) {
  ingest::StationWeekRecord r;
  r.chl_band_0_5 = a;
  r.chl_band_5_10 = b;
  r.chl_band_10_15 = c;
  return r;
}

DepthSample temp(double depth, double t) { return DepthSample{depth, t, std::nullopt, std::nullopt}; }

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Internal;
}

}  // namespace

TEST_CASE("chlorophyll takes the maximum present band") {
  CHECK(chlorophyll_weekly(chl(2.0, 5.5, 3.1)) == 5.5);
  CHECK(chlorophyll_weekly(chl(4.0, std::nullopt, std::nullopt)) == 4.0);
  CHECK(kind_of([] { chlorophyll_weekly(chl(std::nullopt, std::nullopt, std::nullopt)); }) == ErrorKind::AllMissing);
}

TEST_CASE("column mean uses depths up to 12 m") {
  std::vector<DepthSample> p{temp(0, 15), temp(6, 14), temp(12, 13), temp(20, 9)};
  CHECK(column_mean_0_12(p, ProfileField::Temperature) == doctest::Approx(14.0));
  std::vector<DepthSample> one{temp(5, 16.2)};
  CHECK(column_mean_0_12(one, ProfileField::Temperature) == doctest::Approx(16.2));
  std::vector<DepthSample> deep{temp(14, 10), temp(20, 9)};
  CHECK(kind_of([&] { column_mean_0_12(deep, ProfileField::Temperature); }) == ErrorKind::AllMissing);
}

TEST_CASE("stratification differential") {
  std::vector<DepthSample> p{temp(0, 15.5), temp(6, 14.5), temp(9, 13.0), temp(12, 14.0)};
  CHECK(stratification_differential(p, ProfileField::Temperature) == doctest::Approx(1.5));
  std::vector<DepthSample> uniform{temp(0, 12), temp(3, 12), temp(9, 12), temp(12, 12)};
  CHECK(stratification_differential(uniform, ProfileField::Temperature) == doctest::Approx(0.0));
  std::vector<DepthSample> shallow{temp(0, 12), temp(3, 12)};
  CHECK(kind_of([&] { stratification_differential(shallow, ProfileField::Temperature); }) == ErrorKind::BandMissing);
}

TEST_CASE("weekly means of daily series") {
  const IsoWeek w{2016, 2};
  std::vector<ingest::MeteoDay> days;
  for (int i = 0; i < 7; ++i) days.push_back({add_days(monday_of(w), i), 1.0, 4.0 + i, std::nullopt});
  days.push_back({add_days(monday_of(w), 7), 1.0, 100.0, std::nullopt});
  CHECK(weekly_mean_daily(days, w, MeteoField::SunshineHours) == doctest::Approx(7.0));
  CHECK(kind_of([&] { weekly_mean_daily(days, w, MeteoField::Insolation); }) == ErrorKind::AllMissing);

  std::vector<ingest::UpwellingDay> up;
  for (int i = 0; i < 7; ++i) up.push_back({add_days(monday_of(w), i), {120.0, 120.0, 120.0, 120.0}});
  CHECK(weekly_mean_daily(up, w) == doctest::Approx(120.0));
  std::vector<ingest::UpwellingDay> pooled{{monday_of(w), {1.0, std::nullopt, std::nullopt, std::nullopt}},
                                           {add_days(monday_of(w), 1), {2.0, 3.0, std::nullopt, std::nullopt}}};
  CHECK(weekly_mean_daily(pooled, w) == doctest::Approx(2.0));
  CHECK(kind_of([&] { weekly_mean_daily(up, IsoWeek{2016, 9}); }) == ErrorKind::AllMissing);
}

TEST_CASE("seasonality is the ISO week number") {
  CHECK(seasonality(parse_date("2016-01-04")) == 1);
  CHECK(seasonality(parse_date("2015-12-28")) == 53);
  CHECK(seasonality(parse_date("2018-07-02")) == 27);
}

TEST_CASE("Monday label is the status on the Monday after the feature week") {
  const IsoWeek w{2016, 5};
  const Date next_monday = monday_of(next_week(w));
  std::vector<ingest::ZoneStatusDay> h{{"VigoA", next_monday, Status::Closed}, {"CangasF", next_monday, Status::Open}};
  CHECK(monday_label(h, "VigoA", w) == Status::Closed);
  CHECK(monday_label(h, "CangasF", w) == Status::Open);
  CHECK(kind_of([&] { monday_label(h, "VigoA", next_week(w)); }) == ErrorKind::LabelMissing);
}

TEST_CASE("feature layout has 76 distinct names") {
  const auto names = feature_names();
  CHECK(names.size() == 76);
  CHECK(std::set<std::string>(names.begin(), names.end()).size() == 76);
  CHECK(names.back() == "friday_status");
  CHECK(std::count_if(names.begin(), names.end(), [](const std::string& n) { return n.find("temperature") != std::string::npos || n.find("thermocline") != std::string::npos; }) == 14);
  CHECK(std::count_if(names.begin(), names.end(), [](const std::string& n) { return n.find("salinity") != std::string::npos; }) == 7);
}

TEST_CASE("assembly at paper scale") {
  synth::GeneratorConfig cfg;
  const auto data = synth::generate(cfg).data;
  const auto a = assemble_zone_matrix(data, "CangasF");
  const auto b = assemble_zone_matrix(data, "RedondelaC");
  CHECK(a.rows() == 783);
  CHECK(a.cols() == 76);
  CHECK(b.rows() == 783);
  const std::size_t fri = a.column("friday_status");
  std::size_t differing_cols = 0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    bool same = true;
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const double x = a.at(r, c), y = b.at(r, c);
      if (!(x == y || (std::isnan(x) && std::isnan(y)))) same = false;
    }
    if (!same) {
      ++differing_cols;
      CHECK(c == fri);
    }
  }
  CHECK(differing_cols == 1);

  const auto complete = drop_null_rows(a);
  const auto mask = a.null_mask();
  CHECK(complete.rows() + static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true)) == a.rows());
  CHECK(complete.rows() >= 165);
  CHECK(complete.rows() <= 185);
  for (double v : complete.values) CHECK_FALSE(std::isnan(v));
  for (std::size_t r = 0; r < a.rows(); ++r) {
    bool any_nan = false;
    for (double v : a.row(r)) any_nan = any_nan || std::isnan(v);
    CHECK(mask[r] == any_nan);
  }
  CHECK(assemble_zone_matrix(data, "CangasF", AssemblyOptions{ingest::default_stations(), true}).cols() == 83);
}

TEST_CASE("drop_null_rows keeps order and handles the extremes") {
  auto m = testing::random_matrix(20, 3, 5);
  CHECK(drop_null_rows(m).values == m.values);
  m.at(3, 1) = kMissing;
  m.at(10, 0) = kMissing;
  const auto d = drop_null_rows(m);
  CHECK(d.rows() == 18);
  CHECK(d.weeks[3] == m.weeks[4]);
  for (std::size_t r = 0; r < m.rows(); ++r) m.at(r, 2) = kMissing;
  CHECK(drop_null_rows(m).rows() == 0);
}

TEST_CASE("min-max scaling") {
  Dense x(3, 2);
  x.at(0, 0) = 2;
  x.at(1, 0) = 4;
  x.at(2, 0) = 6;
  for (int r = 0; r < 3; ++r) x.at(r, 1) = 5;
  const auto s = minmax_fit(x);
  auto y = x;
  minmax_apply(s, y);
  CHECK(y.at(0, 0) == 0.0);
  CHECK(y.at(1, 0) == 0.5);
  CHECK(y.at(2, 0) == 1.0);
  for (int r = 0; r < 3; ++r) CHECK(y.at(r, 1) == 0.0);
  const std::vector<double> out{10.0, 5.0};
  CHECK(minmax_apply(s, out)[0] == doctest::Approx(2.0));
}

TEST_CASE("kNN predictions are invariant under positive affine re-encoding of raw units") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto m = testing::random_matrix(40, 4, seed);
    Rng rng(seed * 31);
    std::vector<double> a(4), b(4);
    for (int c = 0; c < 4; ++c) {
      a[c] = rng.uniform(0.1, 50.0);
      b[c] = rng.uniform(-100.0, 100.0);
    }
    auto fit = [](const Dense& raw, const std::vector<Status>& y) {
      const auto sc = minmax_fit(raw);
      Dense scaled = raw;
      minmax_apply(sc, scaled);
      return std::make_pair(sc, models::knn_fit(scaled, y, 3));
    };
    Dense raw = materialize(DataView(m));
    Dense re = raw;
    for (std::size_t r = 0; r < re.n_rows; ++r)
      for (std::size_t c = 0; c < 4; ++c) re.at(r, c) = a[c] * re.at(r, c) + b[c];
    const auto [s1, k1] = fit(raw, m.labels);
    const auto [s2, k2] = fit(re, m.labels);
    for (int q = 0; q < 20; ++q) {
      std::vector<double> row(4), row2(4);
      for (int c = 0; c < 4; ++c) {
        row[c] = rng.uniform(-0.2, 1.2);
        row2[c] = a[c] * row[c] + b[c];
      }
      CHECK(k1.predict(minmax_apply(s1, row)) == k2.predict(minmax_apply(s2, row2)));
    }
  }
}

TEST_CASE("matrix CSV and sidecar round trip") {
  auto m = testing::random_matrix(12, 3, 8);
  m.zone_id = "VigoA";
  m.at(2, 1) = kMissing;
  const auto dir = std::filesystem::temp_directory_path() / "habgate_test_matrices";
  save_matrix(dir, m);
  const auto back = load_matrix(dir / "VigoA.csv");
  CHECK(back.zone_id == "VigoA");
  CHECK(back.feature_names == m.feature_names);
  CHECK(back.labels == m.labels);
  CHECK(back.weeks == m.weeks);
  CHECK(std::isnan(back.at(2, 1)));
  CHECK(back.at(5, 2) == m.at(5, 2));
  CHECK(std::filesystem::exists(dir / "VigoA.json"));
  std::filesystem::remove_all(dir);
}
