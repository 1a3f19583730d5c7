#include "habgate/core.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>

namespace habgate {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::UnknownStation: return "UnknownStation";
    case ErrorKind::UnknownZone: return "UnknownZone";
    case ErrorKind::AllMissing: return "AllMissing";
    case ErrorKind::BandMissing: return "BandMissing";
    case ErrorKind::LabelMissing: return "LabelMissing";
    case ErrorKind::TrainTooSmall: return "TrainTooSmall";
    case ErrorKind::NegativeFeature: return "NegativeFeature";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::EmptyMatrix: return "EmptyMatrix";
    case ErrorKind::SampleSizeOutOfRange: return "SampleSizeOutOfRange";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::FeatureMismatch: return "FeatureMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Internal: return "Internal";
  }
  return "Unknown";
}

MalformedRow::MalformedRow(std::size_t line, std::size_t column, const std::string& detail)
    : Error(ErrorKind::MalformedRow,
            "malformed row at line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + detail),
      line_(line),
      column_(column) {}

namespace {

int parse_int(std::string_view s, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorKind::InvalidArgument, "invalid " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw Error(ErrorKind::InvalidArgument, "invalid date: '" + std::string(text) + "'");
  }
  Date d{std::chrono::year{parse_int(text.substr(0, 4), "year")},
         std::chrono::month{static_cast<unsigned>(parse_int(text.substr(5, 2), "month"))},
         std::chrono::day{static_cast<unsigned>(parse_int(text.substr(8, 2), "day"))}};
  if (!d.ok()) throw Error(ErrorKind::InvalidArgument, "invalid date: '" + std::string(text) + "'");
  return d;
}

std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

IsoWeek parse_iso_week(std::string_view text) {
  if (text.size() != 8 || text[4] != '-' || text[5] != 'W') {
    throw Error(ErrorKind::InvalidArgument, "invalid ISO week: '" + std::string(text) + "'");
  }
  IsoWeek w{parse_int(text.substr(0, 4), "year"), parse_int(text.substr(6, 2), "week")};
  if (!is_valid(w)) throw Error(ErrorKind::InvalidArgument, "invalid ISO week: '" + std::string(text) + "'");
  return w;
}

std::string format_iso_week(IsoWeek w) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-W%02d", w.year, w.week);
  return buf;
}

namespace {

using std::chrono::sys_days;

// Monday of ISO week 1: the week containing January 4th.
sys_days iso_year_start(int iso_year) {
  sys_days jan4{Date{std::chrono::year{iso_year}, std::chrono::January, std::chrono::day{4}}};
  unsigned iso_dow = std::chrono::weekday{jan4}.iso_encoding();  // 1 = Monday
  return jan4 - std::chrono::days{iso_dow - 1};
}

}  // namespace

int iso_weeks_in_year(int iso_year) {
  auto span = iso_year_start(iso_year + 1) - iso_year_start(iso_year);
  return static_cast<int>(span.count() / 7);
}

bool is_valid(IsoWeek w) { return w.week >= 1 && w.week <= iso_weeks_in_year(w.year); }

IsoWeek iso_week_of(Date d) {
  sys_days day{d};
  int y = static_cast<int>(d.year());
  int iso_year = y;
  if (day >= iso_year_start(y + 1)) {
    iso_year = y + 1;
  } else if (day < iso_year_start(y)) {
    iso_year = y - 1;
  }
  auto offset = (day - iso_year_start(iso_year)).count();
  return IsoWeek{iso_year, static_cast<int>(offset / 7) + 1};
}

Date day_of_week(IsoWeek w, int offset) {
  return Date{iso_year_start(w.year) + std::chrono::days{(w.week - 1) * 7 + offset}};
}

IsoWeek next_week(IsoWeek w) {
  if (w.week >= iso_weeks_in_year(w.year)) return IsoWeek{w.year + 1, 1};
  return IsoWeek{w.year, w.week + 1};
}

Date add_days(Date d, int days) { return Date{sys_days{d} + std::chrono::days{days}}; }

int days_between(Date a, Date b) { return static_cast<int>((sys_days{b} - sys_days{a}).count()); }

// ---------------------------------------------------------------------------

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::next_u64() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) return 0;
  std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

double Rng::normal() {
  if (spare_normal_) {
    double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  // Marsaglia polar method.
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * factor;
  return u * factor;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace habgate
