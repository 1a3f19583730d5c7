#include <doctest.h>

#include <set>
#include <sstream>

#include "habgate/config.hpp"
#include "habgate/core.hpp"

using namespace habgate;

TEST_CASE("ISO week of calendar dates") {
  CHECK(iso_week_of(parse_date("2016-01-04")) == IsoWeek{2016, 1});
  CHECK(iso_week_of(parse_date("2015-12-28")) == IsoWeek{2015, 53});
  CHECK(iso_week_of(parse_date("2018-07-02")) == IsoWeek{2018, 27});
  CHECK(iso_week_of(parse_date("2010-01-03")) == IsoWeek{2009, 53});
  CHECK(iso_week_of(parse_date("2008-12-29")) == IsoWeek{2009, 1});
}

TEST_CASE("ISO week arithmetic") {
  CHECK(iso_weeks_in_year(2015) == 53);
  CHECK(iso_weeks_in_year(2016) == 52);
  CHECK(iso_weeks_in_year(2020) == 53);
  CHECK(next_week(IsoWeek{2015, 53}) == IsoWeek{2016, 1});
  CHECK(next_week(IsoWeek{2016, 52}) == IsoWeek{2017, 1});
  CHECK(format_date(monday_of(IsoWeek{2016, 1})) == "2016-01-04");
  CHECK(format_date(friday_of(IsoWeek{2016, 1})) == "2016-01-08");
  CHECK(days_between(parse_date("2016-01-04"), parse_date("2016-01-11")) == 7);
  CHECK(format_iso_week(parse_iso_week("2010-W03")) == "2010-W03");
  CHECK_FALSE(is_valid(IsoWeek{2016, 53}));
  CHECK_THROWS_AS(parse_iso_week("2016-W54"), Error);
  CHECK_THROWS_AS(parse_date("2016-02-30"), Error);
}

TEST_CASE("every Monday from 2004 to 2018 maps back to its own week") {
  IsoWeek w{2004, 1};
  int n = 0;
  while (w.year <= 2018) {
    CHECK(iso_week_of(monday_of(w)) == w);
    CHECK(iso_week_of(add_days(monday_of(w), 6)) == w);
    w = next_week(w);
    ++n;
  }
  CHECK(n == 783);
}

TEST_CASE("Rng is deterministic and bounded") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(13) < 13u);
  }
  Rng s(9);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("shuffle is a permutation") {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  Rng r(3);
  r.shuffle(v);
  CHECK(std::set<int>(v.begin(), v.end()).size() == 50);
}

TEST_CASE("mix_seed separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 10; ++s)
    for (std::uint64_t t = 0; t < 10; ++t) seen.insert(mix_seed(s, t));
  CHECK(seen.size() == 100);
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("key-value configuration") {
  std::istringstream in("# comment\nseed = 7\n\nzones=CangasF, VigoA\nflag=on  # trailing\nrate=0.25\n");
  auto kv = KeyValues::parse(in);
  CHECK(kv.get_u64("seed", 0) == 7);
  CHECK(kv.get_list("zones", {}) == std::vector<std::string>{"CangasF", "VigoA"});
  CHECK(kv.get_bool("flag", false));
  CHECK(kv.get_double("rate", 0.0) == doctest::Approx(0.25));
  CHECK(kv.get_int("missing", -3) == -3);
  CHECK(kv.canonical() == "flag=on\nrate=0.25\nseed=7\nzones=CangasF, VigoA\n");
  std::istringstream bad("novalue\n");
  CHECK_THROWS_AS(KeyValues::parse(bad), Error);
  std::istringstream bad_num("x=abc\n");
  auto kv2 = KeyValues::parse(bad_num);
  CHECK_THROWS_AS((void)kv2.get_double("x", 0.0), Error);
}
