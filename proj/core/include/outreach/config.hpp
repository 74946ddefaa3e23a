#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace outreach {

// Flat `key = value` configuration text. Blank lines and `#` comments are
// ignored; later assignments override earlier ones.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig load(const std::filesystem::path& path);
  static KeyValueConfig parse(std::string_view text, std::string_view origin = "<text>");

  // Accepts "key=value"; used for command-line overrides.
  void assign(std::string_view assignment);
  void set(std::string key, std::string value);

  bool contains(std::string_view key) const;
  std::optional<std::string> find(std::string_view key) const;

  std::string get_string(std::string_view key, std::string fallback) const;
  double get_double(std::string_view key, double fallback) const;
  long long get_int(std::string_view key, long long fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  std::vector<double> get_doubles(std::string_view key, std::vector<double> fallback) const;

  // Keys starting with `prefix`, with the prefix removed.
  std::map<std::string, std::string> with_prefix(std::string_view prefix) const;

  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

  // Serialized form, keys sorted, one assignment per line.
  std::string to_text() const;

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

}  // namespace outreach
