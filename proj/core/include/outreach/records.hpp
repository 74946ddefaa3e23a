#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace outreach {

// One person row as read from a source file. Text fields are raw except for
// `zip` (validated to 5 digits) and `state` (validated to 2 letters).
struct PersonRecord {
  std::string record_id;
  std::string first_name;
  std::string middle_name;
  std::string last_name;
  std::string suffix;
  std::string street_number;
  std::string street_name;
  std::string unit;
  std::string city;
  std::string state;
  std::string zip;
  std::string phone;
  std::string email;
  std::string dob;
  std::string group;
  std::vector<float> features;

  bool operator==(const PersonRecord&) const = default;
};

class AbbreviationTable;

// A PersonRecord in canonical form. Only normalize_record produces one with
// content, which lets downstream signatures demand normalized input.
class NormalizedRecord : public PersonRecord {
 public:
  NormalizedRecord() = default;

 private:
  explicit NormalizedRecord(PersonRecord r) : PersonRecord(std::move(r)) {}
  friend NormalizedRecord normalize_record(PersonRecord r, const AbbreviationTable& table);
};

// Canonical identity fields, in file column order.
enum class Field : std::size_t {
  kRecordId,
  kFirstName,
  kMiddleName,
  kLastName,
  kSuffix,
  kStreetNumber,
  kStreetName,
  kUnit,
  kCity,
  kState,
  kZip,
  kPhone,
  kEmail,
  kDob,
  kGroup,
};
inline constexpr std::size_t kFieldCount = 15;

std::string_view field_name(Field f);
std::string& field_ref(PersonRecord& r, Field f);
const std::string& field_ref(const PersonRecord& r, Field f);

// Canonical field -> source column. Unmapped fields read the column with the
// canonical name; fields mapped explicitly must exist in the file.
class ColumnMapping {
 public:
  ColumnMapping() = default;

  // Reads `<field> = <column>` and `feature_prefix` entries, i.e. the `map.`
  // section of a run config with the prefix removed.
  static ColumnMapping from_entries(const std::map<std::string, std::string>& entries);

  void map(Field f, std::string column);
  const std::string& column(Field f) const { return columns_[static_cast<std::size_t>(f)]; }
  bool is_explicit(Field f) const { return explicit_[static_cast<std::size_t>(f)]; }

  const std::string& feature_prefix() const { return feature_prefix_; }
  void set_feature_prefix(std::string prefix) { feature_prefix_ = std::move(prefix); }

 private:
  std::array<std::string, kFieldCount> columns_ = default_columns();
  std::array<bool, kFieldCount> explicit_{};
  std::string feature_prefix_ = "f_";

  static std::array<std::string, kFieldCount> default_columns();
};

struct RowError {
  std::size_t line = 0;  // physical line in the source file
  std::string record_id;
  std::string reason;
};

// Parsed file. `feature_names` have the prefix removed and are shared by
// every record; each record's `features` has the same length.
struct RecordSet {
  std::vector<std::string> feature_names;
  std::vector<PersonRecord> records;
  std::vector<RowError> errors;
};

// Throws DataError on a missing file, a missing required/mapped column, or a
// duplicate record_id. Other bad rows are reported in `errors`.
RecordSet parse_record_file(const std::filesystem::path& path,
                            const ColumnMapping& mapping = {});
RecordSet parse_record_text(std::string_view text, const ColumnMapping& mapping = {});

// Canonical header: record_id,...,group,f_<name>...
void write_record_file(const std::filesystem::path& path,
                       const std::vector<std::string>& feature_names,
                       std::span<const PersonRecord> records);

// Street-suffix and directional abbreviations, e.g. ST -> STREET.
class AbbreviationTable {
 public:
  static const AbbreviationTable& bundled();
  static AbbreviationTable load(const std::filesystem::path& path);
  static AbbreviationTable parse(std::string_view csv_text);

  // Expansion for a single normalized token, or the token itself.
  std::string_view expand(std::string_view token) const;
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, std::string> table_;
};

// Uppercases, strips punctuation and collapses whitespace in name and address
// fields; expands street abbreviations; reduces phone to its last 10 digits;
// lowercases email. record_id, group and features pass through. Idempotent.
NormalizedRecord normalize_record(PersonRecord r,
                                  const AbbreviationTable& table = AbbreviationTable::bundled());

std::vector<NormalizedRecord> normalize_all(std::vector<PersonRecord> records,
                                            const AbbreviationTable& table =
                                                AbbreviationTable::bundled());

// Normalization of a single name-like value.
std::string normalize_name(std::string_view text);

// Read-only rows carrying features, normalized or not.
class RecordRows {
 public:
  RecordRows(std::span<const PersonRecord> rows) : rows_(rows) {}
  RecordRows(std::span<const NormalizedRecord> rows) : rows_(rows) {}
  RecordRows(const std::vector<PersonRecord>& rows) : rows_(std::span<const PersonRecord>(rows)) {}
  RecordRows(const std::vector<NormalizedRecord>& rows)
      : rows_(std::span<const NormalizedRecord>(rows)) {}

  std::size_t size() const {
    return std::visit([](auto s) { return s.size(); }, rows_);
  }
  const PersonRecord& operator[](std::size_t i) const {
    return std::visit([i](auto s) -> const PersonRecord& { return s[i]; }, rows_);
  }

 private:
  std::variant<std::span<const PersonRecord>, std::span<const NormalizedRecord>> rows_;
};

}  // namespace outreach
