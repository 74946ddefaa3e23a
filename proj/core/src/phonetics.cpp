#include "outreach/phonetics.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "outreach/bundled_data.hpp"
#include "outreach/csv.hpp"
#include "outreach/error.hpp"
#include "outreach/format.hpp"
#include "outreach/records.hpp"

namespace outreach {

namespace {

// 0 = vowel-like (separates), -1 = H/W (transparent), otherwise digit.
int soundex_digit(char c) {
  switch (c) {
    case 'B': case 'F': case 'P': case 'V': return 1;
    case 'C': case 'G': case 'J': case 'K': case 'Q': case 'S': case 'X': case 'Z': return 2;
    case 'D': case 'T': return 3;
    case 'L': return 4;
    case 'M': case 'N': return 5;
    case 'R': return 6;
    case 'H': case 'W': return -1;
    default: return 0;
  }
}

char upper_letter(char c) {
  if (c >= 'a' && c <= 'z') return static_cast<char>(c - 'a' + 'A');
  return c;
}

bool is_letter(char c) { return c >= 'A' && c <= 'Z'; }

}  // namespace

std::string phonetic_code(std::string_view name) {
  std::string code;
  int prev = 0;
  for (char raw : name) {
    const char c = upper_letter(raw);
    if (!is_letter(c)) continue;
    const int d = soundex_digit(c);
    if (code.empty()) {
      code.push_back(c);
      prev = d;
      continue;
    }
    if (d == -1) continue;
    if (d != 0 && d != prev) {
      code.push_back(static_cast<char>('0' + d));
      if (code.size() == 4) return code;
    }
    prev = d;
  }
  if (code.empty()) return "0000";
  code.resize(4, '0');
  return code;
}

double string_similarity(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return 0.0;
  if (a == b) return 1.0;
  const std::size_t la = a.size();
  const std::size_t lb = b.size();
  const std::size_t window = std::max(la, lb) / 2 > 0 ? std::max(la, lb) / 2 - 1 : 0;

  std::vector<char> a_matched(la, 0);
  std::vector<char> b_matched(lb, 0);
  std::size_t matches = 0;
  for (std::size_t i = 0; i < la; ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(lb, i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (b_matched[j] || a[i] != b[j]) continue;
      a_matched[i] = b_matched[j] = 1;
      ++matches;
      break;
    }
  }
  if (matches == 0) return 0.0;

  std::size_t transpositions = 0;
  for (std::size_t i = 0, j = 0; i < la; ++i) {
    if (!a_matched[i]) continue;
    while (!b_matched[j]) ++j;
    if (a[i] != b[j]) ++transpositions;
    ++j;
  }
  const double m = static_cast<double>(matches);
  const double jaro =
      (m / la + m / lb + (m - transpositions / 2.0) / m) / 3.0;

  std::size_t prefix = 0;
  while (prefix < std::min<std::size_t>({4, la, lb}) && a[prefix] == b[prefix]) ++prefix;
  return jaro + prefix * 0.1 * (1.0 - jaro);
}

void NameFrequencyTable::add(std::string name, double frequency) {
  if (!(frequency > 0.0 && frequency <= 1.0)) {
    throw DataError("name frequency for '" + name + "' must be in (0,1]");
  }
  table_[std::move(name)] = frequency;
  double smallest = std::numeric_limits<double>::max();
  for (const auto& [n, f] : table_) smallest = std::min(smallest, f);
  floor_ = smallest / 2.0;
}

double NameFrequencyTable::frequency(std::string_view name) const {
  auto it = table_.find(std::string(name));
  return it == table_.end() ? floor_ : it->second;
}

namespace {

NameFrequencyTable from_csv(const CsvTable& csv, std::string_view origin) {
  const int name_col = csv.column("name");
  const int freq_col = csv.column("relative_frequency");
  if (name_col < 0 || freq_col < 0) {
    throw DataError(std::string(origin) + ": expected columns name,relative_frequency");
  }
  NameFrequencyTable t;
  std::unordered_map<std::string, double> staged;
  double smallest = std::numeric_limits<double>::max();
  for (const auto& row : csv.rows) {
    const auto f = parse_double(row.at(freq_col));
    if (!f || !(*f > 0.0 && *f <= 1.0)) {
      throw DataError(std::string(origin) + ": bad frequency for '" + row.at(name_col) + "'");
    }
    staged[normalize_name(row.at(name_col))] = *f;
    smallest = std::min(smallest, *f);
  }
  // Bulk insert keeps loading linear; add() recomputes the floor each call.
  for (auto& [n, f] : staged) t.add(n, f);
  return t;
}

}  // namespace

NameFrequencyTable NameFrequencyTable::load(const std::filesystem::path& path) {
  return from_csv(read_csv(path), path.string());
}

NameFrequencyTable NameFrequencyTable::parse(std::string_view csv_text) {
  return from_csv(parse_csv(csv_text), "<text>");
}

const NameFrequencyTable& NameFrequencyTable::bundled_surnames() {
  static const NameFrequencyTable table = parse(bundled::surnames());
  return table;
}

const NameFrequencyTable& NameFrequencyTable::bundled_forenames() {
  static const NameFrequencyTable table = parse(bundled::forenames());
  return table;
}

double name_commonness(std::string_view name, const NameFrequencyTable& table) {
  return table.frequency(name);
}

}  // namespace outreach
