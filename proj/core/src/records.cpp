#include "outreach/records.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <unordered_set>

#include "outreach/bundled_data.hpp"
#include "outreach/csv.hpp"
#include "outreach/error.hpp"
#include "outreach/format.hpp"

namespace outreach {

namespace {

constexpr std::array<std::string_view, kFieldCount> kFieldNames = {
    "record_id", "first_name", "middle_name", "last_name", "suffix",
    "street_number", "street_name", "unit", "city", "state",
    "zip", "phone", "email", "dob", "group",
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool valid_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (!is_digit(s[i])) return false;
  }
  const int year = std::stoi(std::string(s.substr(0, 4)));
  const int month = std::stoi(std::string(s.substr(5, 2)));
  const int day = std::stoi(std::string(s.substr(8, 2)));
  if (month < 1 || month > 12 || day < 1) return false;
  static constexpr int kDays[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (day > kDays[month - 1]) return false;
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  return !(month == 2 && day == 29 && !leap);
}

// "60601" or "60601-1234" / "606011234" -> "60601"; anything else is invalid.
std::optional<std::string> canonical_zip(std::string_view raw) {
  raw = trim(raw);
  if (raw.empty()) return std::string();
  std::string digits;
  for (char c : raw) {
    if (is_digit(c)) {
      digits.push_back(c);
    } else if (c != '-') {
      return std::nullopt;
    }
  }
  const bool plus4 = digits.size() == 9 && (raw.size() == 9 || (raw.size() == 10 && raw[5] == '-'));
  if (digits.size() == 5 && raw.size() == 5) return digits;
  if (plus4) return digits.substr(0, 5);
  return std::nullopt;
}

// Letters and digits survive; apostrophes and periods vanish; anything else
// becomes a separator. Result is uppercase with single spaces.
void normalize_text_into(std::string_view in, std::string& out) {
  out.clear();
  bool pending_space = false;
  for (char ch : in) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::toupper(c)));
    } else if (ch == '\'' || ch == '.') {
      continue;
    } else {
      pending_space = true;
    }
  }
}

std::string digits_only(std::string_view in) {
  std::string out;
  for (char c : in) {
    if (is_digit(c)) out.push_back(c);
  }
  return out;
}

}  // namespace

std::string_view field_name(Field f) { return kFieldNames[static_cast<std::size_t>(f)]; }

std::string& field_ref(PersonRecord& r, Field f) {
  switch (f) {
    case Field::kRecordId: return r.record_id;
    case Field::kFirstName: return r.first_name;
    case Field::kMiddleName: return r.middle_name;
    case Field::kLastName: return r.last_name;
    case Field::kSuffix: return r.suffix;
    case Field::kStreetNumber: return r.street_number;
    case Field::kStreetName: return r.street_name;
    case Field::kUnit: return r.unit;
    case Field::kCity: return r.city;
    case Field::kState: return r.state;
    case Field::kZip: return r.zip;
    case Field::kPhone: return r.phone;
    case Field::kEmail: return r.email;
    case Field::kDob: return r.dob;
    case Field::kGroup: return r.group;
  }
  return r.record_id;
}

const std::string& field_ref(const PersonRecord& r, Field f) {
  return field_ref(const_cast<PersonRecord&>(r), f);
}

std::array<std::string, kFieldCount> ColumnMapping::default_columns() {
  std::array<std::string, kFieldCount> cols;
  for (std::size_t i = 0; i < kFieldCount; ++i) cols[i] = std::string(kFieldNames[i]);
  return cols;
}

void ColumnMapping::map(Field f, std::string column) {
  columns_[static_cast<std::size_t>(f)] = std::move(column);
  explicit_[static_cast<std::size_t>(f)] = true;
}

ColumnMapping ColumnMapping::from_entries(const std::map<std::string, std::string>& entries) {
  ColumnMapping m;
  for (const auto& [key, column] : entries) {
    if (key == "feature_prefix") {
      m.set_feature_prefix(column);
      continue;
    }
    auto it = std::find(kFieldNames.begin(), kFieldNames.end(), key);
    if (it == kFieldNames.end()) throw ConfigError("unknown mapped field '" + key + "'");
    m.map(static_cast<Field>(it - kFieldNames.begin()), column);
  }
  return m;
}

namespace {

RecordSet parse_records(CsvReader& reader, const ColumnMapping& mapping, std::string_view origin) {
  std::vector<std::string> header;
  if (!reader.next(header) || (header.size() == 1 && header[0].empty())) {
    throw DataError(std::string(origin) + ": missing header row");
  }
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  auto find_column = [&](std::string_view name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };

  std::array<int, kFieldCount> positions{};
  for (std::size_t i = 0; i < kFieldCount; ++i) {
    const auto f = static_cast<Field>(i);
    positions[i] = find_column(mapping.column(f));
    const bool required = f == Field::kRecordId || mapping.is_explicit(f);
    if (positions[i] < 0 && required) {
      throw DataError(std::string(origin) + ": missing column '" + mapping.column(f) + "'");
    }
  }

  RecordSet out;
  std::vector<int> feature_positions;
  const auto& prefix = mapping.feature_prefix();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!prefix.empty() && header[c].size() > prefix.size() &&
        header[c].compare(0, prefix.size(), prefix) == 0) {
      feature_positions.push_back(static_cast<int>(c));
      out.feature_names.push_back(header[c].substr(prefix.size()));
    }
  }

  std::unordered_set<std::string> seen;
  std::vector<std::string> row;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    const std::size_t line = reader.line();
    const int id_pos = positions[static_cast<std::size_t>(Field::kRecordId)];
    std::string id = id_pos < static_cast<int>(row.size()) ? std::string(trim(row[id_pos])) : "";
    auto fail = [&](std::string reason) {
      out.errors.push_back({line, id, std::move(reason)});
    };
    if (row.size() != header.size()) {
      fail("expected " + std::to_string(header.size()) + " columns, found " +
           std::to_string(row.size()));
      continue;
    }
    if (id.empty()) {
      fail("missing record_id");
      continue;
    }

    PersonRecord r;
    for (std::size_t i = 0; i < kFieldCount; ++i) {
      if (positions[i] >= 0) field_ref(r, static_cast<Field>(i)) = std::move(row[positions[i]]);
    }
    r.record_id = id;

    auto zip = canonical_zip(r.zip);
    if (!zip) {
      fail("invalid zip '" + r.zip + "'");
      continue;
    }
    r.zip = *zip;
    if (!trim(r.state).empty()) {
      std::string st;
      normalize_text_into(r.state, st);
      if (st.size() != 2 || !std::isalpha(static_cast<unsigned char>(st[0])) ||
          !std::isalpha(static_cast<unsigned char>(st[1]))) {
        fail("invalid state '" + r.state + "'");
        continue;
      }
    }
    if (!trim(r.dob).empty() && !valid_iso_date(trim(r.dob))) {
      fail("invalid dob '" + r.dob + "'");
      continue;
    }

    r.features.resize(feature_positions.size());
    bool bad_feature = false;
    for (std::size_t k = 0; k < feature_positions.size(); ++k) {
      auto v = parse_float(row[feature_positions[k]]);
      if (!v) {
        fail("feature '" + out.feature_names[k] + "' is not a finite number");
        bad_feature = true;
        break;
      }
      r.features[k] = *v;
    }
    if (bad_feature) continue;

    if (!seen.insert(r.record_id).second) {
      throw DataError(std::string(origin) + ":" + std::to_string(line) +
                      ": duplicate record_id '" + r.record_id + "'");
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace

RecordSet parse_record_file(const std::filesystem::path& path, const ColumnMapping& mapping) {
  if (!std::filesystem::is_regular_file(path)) {
    throw DataError("record file '" + path.string() + "' does not exist");
  }
  CsvReader reader(path);
  return parse_records(reader, mapping, path.string());
}

RecordSet parse_record_text(std::string_view text, const ColumnMapping& mapping) {
  CsvReader reader(text);
  return parse_records(reader, mapping, "<text>");
}

void write_record_file(const std::filesystem::path& path,
                       const std::vector<std::string>& feature_names,
                       std::span<const PersonRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  std::string line;
  for (std::size_t i = 0; i < kFieldCount; ++i) {
    if (i) line.push_back(',');
    line.append(kFieldNames[i]);
  }
  for (const auto& name : feature_names) {
    line.push_back(',');
    append_csv_field(line, "f_" + name);
  }
  line.push_back('\n');
  out << line;
  for (const auto& r : records) {
    if (r.features.size() != feature_names.size()) {
      throw DataError("record '" + r.record_id + "' has " + std::to_string(r.features.size()) +
                      " features, expected " + std::to_string(feature_names.size()));
    }
    line.clear();
    for (std::size_t i = 0; i < kFieldCount; ++i) {
      if (i) line.push_back(',');
      append_csv_field(line, field_ref(r, static_cast<Field>(i)));
    }
    for (float v : r.features) {
      line.push_back(',');
      line += format_float(v);
    }
    line.push_back('\n');
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

const AbbreviationTable& AbbreviationTable::bundled() {
  static const AbbreviationTable table = parse(bundled::street_abbreviations());
  return table;
}

AbbreviationTable AbbreviationTable::load(const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  AbbreviationTable t;
  for (const auto& row : csv.rows) {
    if (row.size() < 2) throw DataError(path.string() + ": abbreviation rows need 2 columns");
    t.table_[normalize_name(row[0])] = normalize_name(row[1]);
  }
  return t;
}

AbbreviationTable AbbreviationTable::parse(std::string_view csv_text) {
  const CsvTable csv = parse_csv(csv_text);
  AbbreviationTable t;
  for (const auto& row : csv.rows) {
    if (row.size() < 2) throw DataError("abbreviation rows need 2 columns");
    t.table_[normalize_name(row[0])] = normalize_name(row[1]);
  }
  return t;
}

std::string_view AbbreviationTable::expand(std::string_view token) const {
  auto it = table_.find(std::string(token));
  return it == table_.end() ? token : std::string_view(it->second);
}

std::string normalize_name(std::string_view text) {
  std::string out;
  normalize_text_into(text, out);
  return out;
}

NormalizedRecord normalize_record(PersonRecord r, const AbbreviationTable& table) {
  std::string scratch;
  auto text_field = [&](std::string& f) {
    normalize_text_into(f, scratch);
    f.swap(scratch);
  };
  text_field(r.first_name);
  text_field(r.middle_name);
  text_field(r.last_name);
  text_field(r.suffix);
  text_field(r.street_number);
  text_field(r.unit);
  text_field(r.city);
  text_field(r.state);

  normalize_text_into(r.street_name, scratch);
  std::string expanded;
  std::string_view rest = scratch;
  while (!rest.empty()) {
    const auto sp = rest.find(' ');
    const auto token = rest.substr(0, sp);
    rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
    if (!expanded.empty()) expanded.push_back(' ');
    expanded.append(table.expand(token));
  }
  r.street_name = std::move(expanded);

  std::string zip = digits_only(r.zip);
  if (zip.size() > 5) zip.resize(5);
  r.zip = std::move(zip);

  std::string phone = digits_only(r.phone);
  if (phone.size() > 10) phone.erase(0, phone.size() - 10);
  r.phone = std::move(phone);

  r.email = to_lower(trim(r.email));
  r.dob = std::string(trim(r.dob));
  return NormalizedRecord(std::move(r));
}

std::vector<NormalizedRecord> normalize_all(std::vector<PersonRecord> records,
                                            const AbbreviationTable& table) {
  std::vector<NormalizedRecord> out;
  out.reserve(records.size());
  for (auto& r : records) out.push_back(normalize_record(std::move(r), table));
  return out;
}

}  // namespace outreach
