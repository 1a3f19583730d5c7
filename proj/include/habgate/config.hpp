/**
 * @file config.hpp
 * @brief Flat key=value configuration files.
 *
 * One entry per line; '#' starts a comment; blank lines are ignored; keys
 * and values are trimmed. Later duplicates override earlier ones.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace habgate {

class KeyValues {
 public:
  KeyValues() = default;
  explicit KeyValues(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {}

  static KeyValues parse(std::istream& in);
  static KeyValues load(const std::filesystem::path& path);

  [[nodiscard]] bool has(const std::string& key) const { return entries_.count(key) > 0; }
  [[nodiscard]] std::optional<std::string> get(const std::string& key) const;
  [[nodiscard]] std::string get_or(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] double get_double(const std::string& key, double fallback) const;
  [[nodiscard]] std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  [[nodiscard]] std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list.
  [[nodiscard]] std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  [[nodiscard]] const std::map<std::string, std::string>& entries() const { return entries_; }
  /// Canonical text form: sorted "key=value" lines.
  [[nodiscard]] std::string canonical() const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace habgate
