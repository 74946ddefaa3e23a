#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace outreach {

struct DecileRow {
  int decile = 0;  // 1 = highest scores
  std::size_t count = 0;
  std::size_t positives = 0;
  double rate = 0.0;
  bool operator==(const DecileRow&) const = default;
};

struct DecileTable {
  std::array<DecileRow, 10> rows{};
  std::size_t n = 0;
  std::size_t positives = 0;
  double base_rate = 0.0;
  bool operator==(const DecileTable&) const = default;
};

// Sorts by score descending, ties by record id ascending, and cuts the order
// into ten bins from the top; the first n % 10 bins hold one extra row.
// Throws DataError on length mismatch, n < 10, or labels other than 0/1.
DecileTable decile_table(std::span<const std::string> record_ids, std::span<const double> scores,
                         std::span<const int> labels);

// Decile rate over base rate. Throws DataError when the base rate is 0 or
// `decile` is outside 1..10.
double lift(const DecileTable& table, int decile);

// Writes decile_<group>.csv (decile,count,positives,rate,lift) and
// decile_<group>.txt (bar chart) per table. Returns the files written.
std::vector<std::filesystem::path> render_decile_report(
    const std::map<std::string, DecileTable>& tables, const std::filesystem::path& out_dir);

inline constexpr int kChartWidth = 50;

// Plain-text bar chart; each bar has round(rate * kChartWidth) marks.
std::string render_decile_chart(const std::string& title, const DecileTable& table);

}  // namespace outreach
