#include <doctest.h>

#include <cmath>
#include <vector>

#include "habgate/core.hpp"
#include "habgate/stats.hpp"

using namespace habgate;
using namespace habgate::stats;

namespace {

const std::vector<double> kX{0.139, 0.157, 0.175, 0.256, 0.344, 0.413, 0.503, 0.577, 0.614, 0.655, 0.954, 1.392, 1.557,
                             1.648, 1.690, 1.994, 2.174, 2.206, 3.245, 3.510, 3.571, 4.354, 4.980, 6.084, 8.351};
const std::vector<double> kY{2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8, 4.1, 3.9, 2.5};

std::vector<double> normal_sample(Rng& r, std::size_t n, double mu = 0.0, double sd = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = mu + sd * r.normal();
  return v;
}

}  // namespace

TEST_CASE("Shapiro-Wilk reference values") {
  const auto a = shapiro_wilk(kX);
  CHECK(a.statistic == doctest::Approx(0.8346662753).epsilon(1e-8));
  CHECK(a.p_value == doctest::Approx(0.00091349).epsilon(1e-4));
  CHECK(a.reject);
  const auto b = shapiro_wilk(kY);
  CHECK(b.statistic == doctest::Approx(0.9657345347).epsilon(1e-8));
  CHECK(b.p_value == doctest::Approx(0.8487287106).epsilon(1e-6));
  CHECK_FALSE(b.reject);
  const std::vector<double> three{1, 2, 4};
  const auto c = shapiro_wilk(three);
  CHECK(c.statistic == doctest::Approx(0.9642857143).epsilon(1e-8));
  CHECK(c.p_value == doctest::Approx(0.6368868450).epsilon(1e-6));
  const std::vector<double> two{1, 2};
  CHECK_THROWS_AS(shapiro_wilk(two), Error);
}

TEST_CASE("Anderson-Darling reference values") {
  CHECK(anderson_darling(kX).statistic == doctest::Approx(1.3384500981).epsilon(1e-8));
  const auto y = anderson_darling(kY);
  CHECK(y.statistic == doctest::Approx(0.1693306480).epsilon(1e-8));
  CHECK_FALSE(y.reject);
  CHECK(anderson_darling(kX).reject);
  CHECK(anderson_darling_critical(0.05) == doctest::Approx(0.752));
}

TEST_CASE("one-way ANOVA reference value") {
  const std::vector<SampleGroup> g{{"a", {1, 2, 3}}, {"b", {2, 3, 4}}, {"c", {3, 4, 5}}};
  const auto r = one_way_anova(g);
  CHECK(r.statistic == doctest::Approx(3.0));
  CHECK(r.p_value == doctest::Approx(0.125).epsilon(1e-9));
  REQUIRE(r.df.has_value());
  CHECK(r.df->first == 2.0);
  CHECK(r.df->second == 6.0);
  CHECK_FALSE(r.reject);
}

TEST_CASE("studentized range distribution reference values") {
  CHECK(studentized_range_quantile(0.95, 3, 10) == doctest::Approx(3.876776750).epsilon(1e-6));
  CHECK(studentized_range_quantile(0.95, 4, 20) == doctest::Approx(3.958293561).epsilon(1e-6));
  CHECK(studentized_range_quantile(0.99, 5, 30) == doctest::Approx(5.047605132).epsilon(1e-6));
  CHECK(studentized_range_quantile(0.95, 2, 5) == doctest::Approx(3.635351695).epsilon(1e-6));
  CHECK(studentized_range_cdf(3, 3, 10) == doctest::Approx(0.8650165848).epsilon(1e-6));
  CHECK(studentized_range_cdf(1, 4, 20) == doctest::Approx(0.1069101489).epsilon(1e-6));
  CHECK(studentized_range_cdf(5, 5, 30) == doctest::Approx(0.9891099812).epsilon(1e-6));
  CHECK(studentized_range_cdf(2.5, 2, 5) == doctest::Approx(0.8626578736).epsilon(1e-6));
  CHECK(studentized_range_cdf(4.2, 10, 60) == doctest::Approx(0.8906317292).epsilon(1e-6));
  CHECK(studentized_range_cdf(0.5, 3, 10) == doctest::Approx(0.0661358278).epsilon(1e-6));
}

TEST_CASE("Tukey-Kramer reference p-values") {
  const std::vector<SampleGroup> eq{{"a", {1, 2, 3}}, {"b", {2, 3, 4}}, {"c", {3, 4, 5}}};
  const auto r = tukey_kramer(eq);
  REQUIRE(r.size() == 3);
  CHECK(r[0].a == "a");
  CHECK(r[0].b == "b");
  CHECK(std::abs(r[0].mean_difference) == doctest::Approx(1.0));
  CHECK(r[0].result.p_value == doctest::Approx(0.48272728).epsilon(1e-5));
  CHECK(r[1].result.p_value == doctest::Approx(0.10886702).epsilon(1e-5));
  CHECK(r[2].result.p_value == doctest::Approx(0.48272728).epsilon(1e-5));

  const std::vector<SampleGroup> uneq{{"a", {1, 2, 3, 4}}, {"b", {2, 3, 4}}, {"c", {5, 6, 7, 8, 9}}};
  const auto u = tukey_kramer(uneq);
  CHECK(u[0].result.p_value == doctest::Approx(0.88398497).epsilon(1e-5));
  CHECK(u[1].result.p_value == doctest::Approx(0.00224643).epsilon(1e-4));
  CHECK(u[2].result.p_value == doctest::Approx(0.00803486).epsilon(1e-4));
  CHECK(u[1].result.reject);
  CHECK_FALSE(u[0].result.reject);
}

TEST_CASE("studentized range is monotone") {
  for (int k : {2, 3, 5, 8}) {
    double prev = 0.0;
    for (double q = 0.25; q < 8.0; q += 0.25) {
      const double c = studentized_range_cdf(q, k, 20);
      CHECK(c >= prev);
      prev = c;
    }
    CHECK(studentized_range_quantile(0.95, k + 1, 20) > studentized_range_quantile(0.95, k, 20));
    CHECK(studentized_range_quantile(0.95, k, 10) > studentized_range_quantile(0.95, k, 40));
    const double q = studentized_range_quantile(0.9, k, 15);
    CHECK(studentized_range_cdf(q, k, 15) == doctest::Approx(0.9).epsilon(1e-8));
  }
}

TEST_CASE("normality statistics are invariant under positive affine transforms") {
  Rng r(5);
  for (int t = 0; t < 10; ++t) {
    const auto x = normal_sample(r, 10 + static_cast<std::size_t>(t) * 4);
    const double a = r.uniform(0.1, 50.0), b = r.uniform(-100.0, 100.0);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
    CHECK(shapiro_wilk(y).statistic == doctest::Approx(shapiro_wilk(x).statistic).epsilon(1e-9));
    CHECK(anderson_darling(y).statistic == doctest::Approx(anderson_darling(x).statistic).epsilon(1e-9));
  }
}

TEST_CASE("rejection rates under the null are near alpha") {
  Rng r(123);
  const int trials = 2000;
  int sw = 0, ad = 0, anova = 0;
  for (int t = 0; t < trials; ++t) {
    const auto x = normal_sample(r, 20, 3.0, 2.0);
    sw += shapiro_wilk(x).reject;
    ad += anderson_darling(x).reject;
    const std::vector<SampleGroup> g{{"a", normal_sample(r, 10)}, {"b", normal_sample(r, 10)}, {"c", normal_sample(r, 10)}};
    anova += one_way_anova(g).reject;
  }
  CHECK(sw / double(trials) == doctest::Approx(0.05).epsilon(0.4));
  CHECK(ad / double(trials) == doctest::Approx(0.05).epsilon(0.4));
  CHECK(anova / double(trials) == doctest::Approx(0.05).epsilon(0.4));
}

TEST_CASE("shifted groups are detected") {
  Rng r(8);
  const std::vector<SampleGroup> g{{"a", normal_sample(r, 10)}, {"b", normal_sample(r, 10)}, {"c", normal_sample(r, 10, 4.0)}};
  CHECK(one_way_anova(g).reject);
  const auto t = tukey_kramer(g);
  CHECK_FALSE(t[0].result.reject);
  CHECK(t[1].result.reject);
  CHECK(t[2].result.reject);
}
