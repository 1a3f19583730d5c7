#include "habgate/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "habgate/core.hpp"

namespace habgate::stats {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double norm_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }
double norm_ppf(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

double poly(std::span<const double> c, double x) {
  double r = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
  return r;
}

std::vector<double> sorted_copy(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  for (double d : v) {
    if (!std::isfinite(d)) throw Error(ErrorKind::InvalidArgument, "sample contains a non-finite value");
  }
  std::sort(v.begin(), v.end());
  return v;
}

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace

// ---------------------------------------------------------------------------
// Shapiro-Wilk (Royston 1995, AS R94)
// ---------------------------------------------------------------------------

TestResult shapiro_wilk(std::span<const double> sample, double alpha) {
  const std::size_t n = sample.size();
  if (n < 3 || n > 50) {
    throw Error(ErrorKind::SampleSizeOutOfRange, "Shapiro-Wilk needs 3 <= n <= 50, got " + std::to_string(n));
  }
  const auto x = sorted_copy(sample);
  if (x.back() - x.front() <= 0.0) throw Error(ErrorKind::DegenerateVariance, "sample has zero variance");

  static constexpr std::array<double, 6> c1{0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
  static constexpr std::array<double, 6> c2{0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  static constexpr std::array<double, 4> c3{0.544, -0.39978, 0.025054, -6.714e-4};
  static constexpr std::array<double, 4> c4{1.3822, -0.77857, 0.062767, -0.0020322};
  static constexpr std::array<double, 4> c5{-1.5861, -0.31082, -0.083751, 0.0038915};
  static constexpr std::array<double, 3> c6{-0.4803, -0.082676, 0.0030302};
  static constexpr std::array<double, 2> g{-2.273, 0.459};

  const std::size_t half = n / 2;
  const double an = static_cast<double>(n);
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::numbers::sqrt2 / 2.0;
  } else {
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      m[i] = norm_ppf((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, rsn) - m[0] / ssumm2;
    std::size_t first;
    double fac;
    if (n > 5) {
      first = 2;
      const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
    } else {
      first = 1;
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
  }

  const double mu = mean_of(x);
  double ssq = 0.0;
  for (double v : x) ssq += (v - mu) * (v - mu);
  double num = 0.0;
  for (std::size_t i = 0; i < half; ++i) num += a[i] * (x[n - 1 - i] - x[i]);
  const double w = std::min(1.0, num * num / ssq);

  double p;
  if (n == 3) {
    const double pi6 = 6.0 / std::numbers::pi;
    const double stqr = std::numbers::pi / 3.0;
    p = std::max(0.0, pi6 * (std::asin(std::sqrt(w)) - stqr));
  } else {
    double w1 = std::log(1.0 - w);
    double mm, s;
    bool tiny = false;
    if (n <= 11) {
      const double gamma = poly(g, an);
      if (w1 >= gamma) {
        tiny = true;
      } else {
        w1 = -std::log(gamma - w1);
      }
      mm = poly(c3, an);
      s = std::exp(poly(c4, an));
    } else {
      const double xx = std::log(an);
      mm = poly(c5, xx);
      s = std::exp(poly(c6, xx));
    }
    p = tiny ? 1e-99 : norm_sf((w1 - mm) / s);
  }
  TestResult r;
  r.test = "shapiro_wilk";
  r.statistic = w;
  r.p_value = std::clamp(p, 0.0, 1.0);
  r.alpha = alpha;
  r.reject = r.p_value < alpha;
  return r;
}

// ---------------------------------------------------------------------------
// Anderson-Darling
// ---------------------------------------------------------------------------

double anderson_darling_critical(double alpha) {
  // Stephens (1974), case 4, for the corrected statistic.
  static constexpr std::array<std::pair<double, double>, 5> table{
      {{0.15, 0.576}, {0.10, 0.656}, {0.05, 0.752}, {0.025, 0.873}, {0.01, 1.035}}};
  for (const auto& [level, crit] : table) {
    if (std::abs(level - alpha) < 1e-12) return crit;
  }
  throw Error(ErrorKind::InvalidArgument, "no Anderson-Darling critical value tabulated for this alpha");
}

TestResult anderson_darling(std::span<const double> sample, double alpha) {
  const std::size_t n = sample.size();
  if (n < 3) throw Error(ErrorKind::SampleSizeOutOfRange, "Anderson-Darling needs n >= 3");
  const auto x = sorted_copy(sample);
  const double mu = mean_of(x);
  double ssq = 0.0;
  for (double v : x) ssq += (v - mu) * (v - mu);
  const double sd = std::sqrt(ssq / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw Error(ErrorKind::DegenerateVariance, "sample has zero variance");

  const double an = static_cast<double>(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = (x[i] - mu) / sd;
    const double zr = (x[n - 1 - i] - mu) / sd;
    // log Phi(zi) + log(1 - Phi(zr)), via erfc to keep the tails finite.
    s += (2.0 * static_cast<double>(i + 1) - 1.0) * (std::log(norm_cdf(zi)) + std::log(norm_sf(zr)));
  }
  const double a2 = -an - s / an;
  const double adj = a2 * (1.0 + 0.75 / an + 2.25 / (an * an));

  // D'Agostino & Stephens (1986), Table 4.9.
  double p;
  if (adj >= 0.6) {
    p = std::exp(1.2937 - 5.709 * adj + 0.0186 * adj * adj);
  } else if (adj >= 0.34) {
    p = std::exp(0.9177 - 4.279 * adj - 1.38 * adj * adj);
  } else if (adj >= 0.2) {
    p = 1.0 - std::exp(-8.318 + 42.796 * adj - 59.938 * adj * adj);
  } else {
    p = 1.0 - std::exp(-13.436 + 101.14 * adj - 223.73 * adj * adj);
  }

  TestResult r;
  r.test = "anderson_darling";
  r.statistic = a2;
  r.adjusted_statistic = adj;
  r.p_value = std::clamp(p, 0.0, 1.0);
  r.alpha = alpha;
  r.critical_value = anderson_darling_critical(alpha);
  r.reject = adj > *r.critical_value;
  return r;
}

// ---------------------------------------------------------------------------
// ANOVA
// ---------------------------------------------------------------------------

double f_survival(double f, double d1, double d2) {
  if (f == kInf) return 0.0;
  if (f <= 0.0) return 1.0;
  return boost::math::ibeta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

namespace {

struct Pooled {
  std::vector<double> means;
  double ssw = 0.0;
  double ssb = 0.0;
  std::size_t total = 0;
};

Pooled pool(std::span<const SampleGroup> groups) {
  if (groups.size() < 2) throw Error(ErrorKind::InvalidArgument, "at least two groups are required");
  Pooled p;
  double grand = 0.0;
  for (const auto& gr : groups) {
    if (gr.values.size() < 2) {
      throw Error(ErrorKind::SampleSizeOutOfRange, "group '" + gr.name + "' has fewer than 2 values");
    }
    for (double v : gr.values) {
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "group '" + gr.name + "' has a non-finite value");
    }
    p.means.push_back(mean_of(gr.values));
    grand += std::accumulate(gr.values.begin(), gr.values.end(), 0.0);
    p.total += gr.values.size();
  }
  grand /= static_cast<double>(p.total);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (double v : groups[i].values) p.ssw += (v - p.means[i]) * (v - p.means[i]);
    const double d = p.means[i] - grand;
    p.ssb += static_cast<double>(groups[i].values.size()) * d * d;
  }
  return p;
}

}  // namespace

TestResult one_way_anova(std::span<const SampleGroup> groups, double alpha) {
  const Pooled p = pool(groups);
  const double d1 = static_cast<double>(groups.size() - 1);
  const double d2 = static_cast<double>(p.total - groups.size());
  const double msb = p.ssb / d1;
  const double msw = p.ssw / d2;
  TestResult r;
  r.test = "one_way_anova";
  r.df = std::make_pair(d1, d2);
  r.alpha = alpha;
  if (msw == 0.0) {
    r.statistic = msb > 0.0 ? kInf : 0.0;
    r.p_value = msb > 0.0 ? 0.0 : 1.0;
  } else {
    r.statistic = msb / msw;
    r.p_value = std::clamp(f_survival(r.statistic, d1, d2), 0.0, 1.0);
  }
  r.reject = r.p_value < alpha;
  return r;
}

// ---------------------------------------------------------------------------
// Studentized range
// ---------------------------------------------------------------------------

namespace {

constexpr int kGaussPoints = 16;

struct GaussLegendre {
  std::array<double, kGaussPoints> x{};
  std::array<double, kGaussPoints> w{};

  GaussLegendre() {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    const int n = kGaussPoints;
    for (int i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-15) break;
      }
      x[static_cast<std::size_t>(i)] = z;
      w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre& gauss() {
  static const GaussLegendre g;
  return g;
}

/// Composite Gauss-Legendre over [a, b] with the given number of panels.
template <class F>
double integrate(F&& f, double a, double b, int panels) {
  const auto& gl = gauss();
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    double s = 0.0;
    for (int i = 0; i < kGaussPoints; ++i) s += gl.w[static_cast<std::size_t>(i)] * f(mid + 0.5 * h * gl.x[static_cast<std::size_t>(i)]);
    total += 0.5 * h * s;
  }
  return total;
}

/// P(range of k standard normals <= w).
double normal_range_cdf(double w, int k) {
  if (w <= 0.0) return 0.0;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto f = [&](double z) {
    const double d = norm_cdf(z) - norm_cdf(z - w);
    return inv_sqrt_2pi * std::exp(-0.5 * z * z) * std::pow(d, k - 1);
  };
  // The integrand vanishes outside [-8.5, 8.5 + w]; past that phi(z) < 1e-15.
  const double hi = 8.5 + w;
  const int panels = std::max(16, static_cast<int>(std::ceil((hi + 8.5) / 0.75)));
  return std::min(1.0, k * integrate(f, -8.5, hi, panels));
}

}  // namespace

double studentized_range_cdf(double q, int k, double df) {
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "studentized range needs k >= 2");
  if (!(df > 0.0)) throw Error(ErrorKind::InvalidArgument, "degrees of freedom must be positive");
  if (q <= 0.0) return 0.0;
  if (q == kInf) return 1.0;
  // Density of s = chi_df / sqrt(df), on the log scale.
  const double log_norm = 0.5 * df * std::log(df) - std::lgamma(0.5 * df) - (0.5 * df - 1.0) * std::log(2.0);
  auto f = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double log_density = log_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s;
    return std::exp(log_density) * normal_range_cdf(q * s, k);
  };
  const double spread = 10.0 / std::sqrt(df);
  const double lo = std::max(0.0, 1.0 - spread);
  const double hi = 1.0 + spread + 1.0;
  const double p = integrate(f, lo, hi, 48);
  return std::clamp(p, 0.0, 1.0);
}

double studentized_range_quantile(double p, int k, double df) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "probability must be in (0, 1)");
  double lo = 0.0, hi = 8.0;
  while (studentized_range_cdf(hi, k, df) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) throw Error(ErrorKind::Internal, "studentized range quantile did not bracket");
  }
  for (int it = 0; it < 100 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    (studentized_range_cdf(mid, k, df) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<PairwiseResult> tukey_kramer(std::span<const SampleGroup> groups, double alpha) {
  const Pooled p = pool(groups);
  const int k = static_cast<int>(groups.size());
  const double df = static_cast<double>(p.total - groups.size());
  const double msw = p.ssw / df;
  const double critical = studentized_range_quantile(1.0 - alpha, k, df);
  std::vector<PairwiseResult> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      PairwiseResult pr;
      pr.a = groups[i].name;
      pr.b = groups[j].name;
      pr.mean_difference = p.means[i] - p.means[j];
      const double diff = std::abs(pr.mean_difference);
      const double se = std::sqrt(msw / 2.0 * (1.0 / static_cast<double>(groups[i].values.size()) +
                                               1.0 / static_cast<double>(groups[j].values.size())));
      auto& r = pr.result;
      r.test = "tukey_kramer";
      r.df = std::make_pair(static_cast<double>(k), df);
      r.alpha = alpha;
      r.critical_value = critical;
      if (se == 0.0) {
        r.statistic = diff > 0.0 ? kInf : 0.0;
      } else {
        r.statistic = diff / se;
      }
      r.p_value = std::clamp(1.0 - studentized_range_cdf(r.statistic, k, df), 0.0, 1.0);
      r.reject = r.p_value < alpha;
      out.push_back(std::move(pr));
    }
  }
  return out;
}

json to_json(const TestResult& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); };
  json j{{"test", r.test}, {"statistic", num(r.statistic)}, {"p_value", r.p_value}, {"alpha", r.alpha},
         {"reject", r.reject}};
  if (r.df) j["df"] = {r.df->first, r.df->second};
  if (r.adjusted_statistic) j["adjusted_statistic"] = *r.adjusted_statistic;
  if (r.critical_value) j["critical_value"] = *r.critical_value;
  return j;
}

json to_json(const PairwiseResult& r) {
  return {{"a", r.a}, {"b", r.b}, {"mean_difference", r.mean_difference}, {"result", to_json(r.result)}};
}

}  // namespace habgate::stats
