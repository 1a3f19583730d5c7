#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "habgate/ingest.hpp"
#include "habgate/synth.hpp"

using namespace habgate;
using namespace habgate::ingest;

namespace {

const char* kStationHeader =
    "station_id,iso_week,profile,chl_0_5,chl_5_10,chl_10_15,dinophysis,ammonium,phosphate,nitrate,nitrite\n";

std::string profile_0_to_24() {
  std::string p;
  for (int d = 0; d <= 24; d += 2) p += (p.empty() ? "" : ";") + std::to_string(d) + ":14.1:35.2:7.9";
  return p;
}

}  // namespace

TEST_CASE("station rows keep missing cells as missing") {
  std::istringstream in(std::string(kStationHeader) + "V3,2016-W07," + profile_0_to_24() + ",1.2,0.8,,40,0.5,0.1,,0.02\n");
  auto recs = parse_station_csv(in);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].station_id == "V3");
  CHECK(recs[0].week == IsoWeek{2016, 7});
  CHECK(recs[0].profile.size() == 13);
  CHECK_FALSE(recs[0].nitrate.has_value());
  CHECK_FALSE(recs[0].chl_band_10_15.has_value());
  CHECK(*recs[0].dinophysis_cells == 40.0);
  CHECK(count_missing(recs) == 2);
}

TEST_CASE("station parse errors carry positions") {
  std::istringstream neg(std::string(kStationHeader) + "V1,2016-W07,-1:14:35:8,1,1,1,1,1,1,1,1\n");
  try {
    parse_station_csv(neg);
    FAIL("expected MalformedRow");
  } catch (const MalformedRow& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
  }
  std::istringstream unknown(std::string(kStationHeader) + "V9,2016-W07,0:14:35:8,1,1,1,1,1,1,1,1\n");
  try {
    parse_station_csv(unknown);
    FAIL("expected UnknownStation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownStation);
  }
  std::istringstream text(std::string(kStationHeader) + "V1,2016-W07,0:14:35:8,abc,1,1,1,1,1,1,1\n");
  CHECK_THROWS_AS(parse_station_csv(text), MalformedRow);
  std::istringstream header("station,week\n");
  CHECK_THROWS_AS(parse_station_csv(header), MalformedRow);
}

TEST_CASE("zone status tokens") {
  std::istringstream in("zone_id,date,status\nVigoA,2016-02-05,CLOSED\nVigoA,2016-02-08,closed \nVigoA,2016-02-12,OPEN\n");
  auto days = parse_zone_status_csv(in);
  REQUIRE(days.size() == 3);
  CHECK(days[0] == ZoneStatusDay{"VigoA", parse_date("2016-02-05"), Status::Closed});
  CHECK(days[1].status == Status::Closed);
  CHECK(days[2].status == Status::Open);
  std::istringstream half("zone_id,date,status\nVigoA,2016-02-05,HALF\n");
  CHECK_THROWS_AS(parse_zone_status_csv(half), MalformedRow);
  std::istringstream zone("zone_id,date,status\nNowhere,2016-02-05,OPEN\n");
  CHECK_THROWS_AS(parse_zone_status_csv(zone), Error);
}

TEST_CASE("meteo and upwelling rows") {
  std::istringstream m("date,solar_irradiation,sunshine_hours,insolation\n2016-01-04,120.5,,0.4\n");
  auto days = parse_meteo_csv(m);
  REQUIRE(days.size() == 1);
  CHECK_FALSE(days[0].sunshine_hours.has_value());
  CHECK(count_missing(days) == 1);
  std::istringstream u("date,ui_00,ui_06,ui_12,ui_18\n2016-01-04,100,,-20.5,3\n");
  auto up = parse_upwelling_csv(u);
  REQUIRE(up.size() == 1);
  CHECK_FALSE(up[0].values_4x[1].has_value());
  CHECK(*up[0].values_4x[2] == -20.5);
}

TEST_CASE("CSV round trip and missing-marker conservation on generated data") {
  synth::GeneratorConfig cfg;
  cfg.n_years = 2;
  cfg.seed = 11;
  const auto data = synth::generate(cfg).data;
  std::stringstream s, m, u, z;
  write_station_csv(s, data.stations);
  write_meteo_csv(m, data.meteo);
  write_upwelling_csv(u, data.upwelling);
  write_zone_status_csv(z, data.status);
  const auto s2 = parse_station_csv(s);
  const auto m2 = parse_meteo_csv(m);
  const auto u2 = parse_upwelling_csv(u);
  const auto z2 = parse_zone_status_csv(z);
  CHECK(s2 == data.stations);
  CHECK(m2 == data.meteo);
  CHECK(u2 == data.upwelling);
  CHECK(z2 == data.status);
  CHECK(count_missing(s2) == count_missing(data.stations));
  CHECK(count_missing(data.stations) > 0);
}

TEST_CASE("validation findings") {
  synth::GeneratorConfig cfg;
  cfg.n_years = 2;
  auto data = synth::generate(cfg).data;
  CHECK(validate_dataset(data).clean());

  auto dup = data;
  dup.stations.push_back(dup.stations.front());
  auto r1 = validate_dataset(dup);
  REQUIRE(r1.findings.size() == 1);
  CHECK(r1.findings[0].kind == "duplicate");
  CHECK(r1.findings[0].source == "stations");

  auto gap = data;
  const Date victim = monday_of(IsoWeek{2004, 10});
  std::erase_if(gap.status, [&](const ZoneStatusDay& d) { return d.zone_id == "VigoA" && d.date == victim; });
  auto r2 = validate_dataset(gap);
  REQUIRE(r2.findings.size() == 1);
  CHECK(r2.findings[0].kind == "gap");
  CHECK(r2.findings[0].detail.find(format_date(victim)) != std::string::npos);
}

TEST_CASE("binary dataset round trip") {
  synth::GeneratorConfig cfg;
  cfg.n_years = 1;
  const auto data = synth::generate(cfg).data;
  const auto path = std::filesystem::temp_directory_path() / "habgate_test_dataset.bin";
  save_dataset(path, data);
  CHECK(load_dataset(path) == data);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_dataset(path), Error);
}
