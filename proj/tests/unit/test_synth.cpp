#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "habgate/preprocess.hpp"
#include "habgate/synth.hpp"

using namespace habgate;
using namespace habgate::synth;

namespace {

double closed_fraction(const std::vector<Status>& v) {
  return static_cast<double>(std::count(v.begin(), v.end(), Status::Closed)) / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("observed closure fractions match the configured rates") {
  for (std::uint64_t seed : {1, 2, 3}) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    const auto g = generate(cfg);
    for (const auto& [zone, rate] : cfg.closure_rates) {
      CHECK_MESSAGE(std::abs(closed_fraction(g.latent.observed_monday.at(zone)) - rate) <= 0.03, zone);
    }
  }
}

TEST_CASE("outer zones close more often than the inner bay") {
  const auto g = generate(GeneratorConfig{});
  double outer = 0.0, inner = 0.0;
  for (const char* z : {"CangasF", "CangasG", "CangasH"}) outer += closed_fraction(g.latent.observed_monday.at(z)) / 3.0;
  for (const char* z : {"RedondelaB", "RedondelaC", "RedondelaD"}) inner += closed_fraction(g.latent.observed_monday.at(z)) / 3.0;
  CHECK(outer > inner + 0.2);
}

TEST_CASE("generation is a pure function of the configuration") {
  GeneratorConfig cfg;
  cfg.n_years = 3;
  cfg.seed = 42;
  const auto a = generate(cfg);
  const auto b = generate(cfg);
  CHECK(a.data == b.data);
  CHECK(a.latent.bloom == b.latent.bloom);
  cfg.seed = 43;
  CHECK_FALSE(generate(cfg).data == a.data);
}

TEST_CASE("zero outage shares give complete records") {
  GeneratorConfig cfg;
  cfg.n_years = 2;
  cfg.missing_stations = cfg.missing_meteo = cfg.missing_upwelling = 0.0;
  const auto g = generate(cfg);
  CHECK(ingest::count_missing(g.data.stations) == 0);
  CHECK(ingest::count_missing(g.data.meteo) == 0);
  const auto m = preprocess::assemble_zone_matrix(g.data, "VigoA");
  CHECK(preprocess::drop_null_rows(m).rows() == m.rows());
}

TEST_CASE("default outages leave roughly the reported share of complete weeks") {
  const auto g = generate(GeneratorConfig{});
  const auto m = preprocess::drop_null_rows(preprocess::assemble_zone_matrix(g.data, "CangasF"));
  CHECK(m.rows() >= 165);
  CHECK(m.rows() <= 185);
}

TEST_CASE("configuration round-trips through key-values") {
  GeneratorConfig cfg;
  cfg.seed = 9;
  cfg.persistence = 0.7;
  cfg.closure_rates["VigoA"] = 0.3;
  const auto back = config_from_key_values(to_key_values(cfg));
  CHECK(back.seed == 9);
  CHECK(back.persistence == 0.7);
  CHECK(back.closure_rates.at("VigoA") == 0.3);
  CHECK(to_key_values(back).canonical() == to_key_values(cfg).canonical());
  GeneratorConfig bad;
  bad.missing_meteo = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("reference bound matches the golden file") {
  std::ifstream in("golden/bayes_bound.json");
  REQUIRE(in.good());
  const auto golden = nlohmann::json::parse(in);
  const auto now = to_json(bayes_reference(GeneratorConfig{}));
  REQUIRE(now["zones"].size() == golden["zones"].size());
  for (std::size_t i = 0; i < golden["zones"].size(); ++i) {
    const auto& g = golden["zones"][i];
    const auto& n = now["zones"][i];
    CHECK(n["zone_id"] == g["zone_id"]);
    for (const char* key : {"sensitivity", "accuracy", "closure_fraction", "latent_fraction"})
      CHECK(n[key].get<double>() == doctest::Approx(g[key].get<double>()).epsilon(1e-12));
  }
}
