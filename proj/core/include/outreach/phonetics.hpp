#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>

namespace outreach {

// American Soundex: first letter plus three digits, zero padded. Non-letters
// are skipped; H and W do not separate equal codes, vowels do. Input without
// letters yields "0000".
std::string phonetic_code(std::string_view name);

// Jaro-Winkler similarity with prefix scale 0.1 over at most 4 characters.
// 1.0 only for equal non-empty strings; 0.0 when no characters match.
double string_similarity(std::string_view a, std::string_view b);

// Relative frequencies of normalized names. Unseen names get `floor`, which
// defaults to half the smallest listed frequency.
class NameFrequencyTable {
 public:
  NameFrequencyTable() = default;

  static NameFrequencyTable load(const std::filesystem::path& path);
  static NameFrequencyTable parse(std::string_view csv_text);
  static const NameFrequencyTable& bundled_surnames();
  static const NameFrequencyTable& bundled_forenames();

  void add(std::string name, double frequency);

  double frequency(std::string_view name) const;
  double floor() const { return floor_; }
  std::size_t size() const { return table_.size(); }
  const std::unordered_map<std::string, double>& entries() const { return table_; }

 private:
  std::unordered_map<std::string, double> table_;
  double floor_ = 0.0;
};

// Table frequency of `name`, or the table floor when unseen.
double name_commonness(std::string_view name, const NameFrequencyTable& table);

}  // namespace outreach
