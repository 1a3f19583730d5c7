#pragma once

#include <chrono>
#include <cmath>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace habgate {

/// Production-area status. Closures are the positive class.
enum class Status : std::uint8_t { Open = 0, Closed = 1 };

inline std::string_view to_string(Status s) { return s == Status::Closed ? "CLOSED" : "OPEN"; }
inline double encode(Status s) { return s == Status::Closed ? 1.0 : 0.0; }

/// Missing numeric cell. Matrices use NaN as the in-memory missing marker.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ErrorKind {
  MalformedRow,
  UnknownStation,
  UnknownZone,
  AllMissing,
  BandMissing,
  LabelMissing,
  TrainTooSmall,
  NegativeFeature,
  NonFiniteLoss,
  EmptyMatrix,
  SampleSizeOutOfRange,
  DegenerateVariance,
  FeatureMismatch,
  InvalidArgument,
  Io,
  Internal,
};

std::string_view to_string(ErrorKind kind);

/**
 * @brief Single exception type for the library; callers branch on kind().
 */
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failure with 1-based line and column position.
class MalformedRow : public Error {
 public:
  MalformedRow(std::size_t line, std::size_t column, const std::string& detail);
  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// ---------------------------------------------------------------------------
// Calendar
// ---------------------------------------------------------------------------

using Date = std::chrono::year_month_day;

/// ISO-8601 week designation (Monday-start weeks).
struct IsoWeek {
  int year{};
  int week{};  // 1..53

  auto operator<=>(const IsoWeek&) const = default;
};

Date parse_date(std::string_view text);  // YYYY-MM-DD, throws InvalidArgument
std::string format_date(Date d);
IsoWeek parse_iso_week(std::string_view text);  // YYYY-Www
std::string format_iso_week(IsoWeek w);

/// Number of ISO weeks (52 or 53) in an ISO year.
int iso_weeks_in_year(int iso_year);
bool is_valid(IsoWeek w);
IsoWeek iso_week_of(Date d);
/// Weekday offset 0 = Monday .. 6 = Sunday.
Date day_of_week(IsoWeek w, int offset);
inline Date monday_of(IsoWeek w) { return day_of_week(w, 0); }
inline Date friday_of(IsoWeek w) { return day_of_week(w, 4); }
IsoWeek next_week(IsoWeek w);
Date add_days(Date d, int days);
/// Signed whole-day difference b - a.
int days_between(Date a, Date b);

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/**
 * @brief Seeded generator with platform-independent derived distributions.
 *
 * std::*_distribution output is implementation-defined, so every draw the
 * pipeline depends on goes through these members.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound), unbiased.
  std::uint64_t below(std::uint64_t bound);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  std::optional<double> spare_normal_;
};

/// SplitMix64 finalizer; derives independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// 64-bit FNV-1a, used to derive seeds from names.
std::uint64_t fnv1a(std::string_view text);

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

/// Whole file as bytes; throws Io naming the path.
std::string read_text(const std::filesystem::path& path);
/// Writes bytes verbatim (binary mode); throws Io naming the path.
void write_text(const std::filesystem::path& path, std::string_view bytes);

}  // namespace habgate
