#include "outreach/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "outreach/csv.hpp"
#include "outreach/error.hpp"
#include "outreach/format.hpp"

namespace outreach {

DecileTable decile_table(std::span<const std::string> record_ids, std::span<const double> scores,
                         std::span<const int> labels) {
  const std::size_t n = scores.size();
  if (record_ids.size() != n || labels.size() != n) {
    throw DataError("decile table: ids, scores and labels differ in length");
  }
  if (n < 10) throw DataError("decile table needs at least 10 rows, got " + std::to_string(n));
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("decile table: labels must be 0 or 1");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return record_ids[a] < record_ids[b];
  });

  DecileTable t;
  t.n = n;
  const std::size_t base = n / 10;
  const std::size_t extra = n % 10;
  std::size_t at = 0;
  for (std::size_t d = 0; d < 10; ++d) {
    DecileRow& row = t.rows[d];
    row.decile = static_cast<int>(d + 1);
    row.count = base + (d < extra ? 1 : 0);
    for (std::size_t k = 0; k < row.count; ++k) row.positives += labels[order[at++]];
    row.rate = static_cast<double>(row.positives) / static_cast<double>(row.count);
    t.positives += row.positives;
  }
  t.base_rate = static_cast<double>(t.positives) / static_cast<double>(n);
  return t;
}

double lift(const DecileTable& table, int decile) {
  if (decile < 1 || decile > 10) throw DataError("decile must be in 1..10");
  if (table.base_rate <= 0.0) throw DataError("lift is undefined for a zero base rate");
  return table.rows[static_cast<std::size_t>(decile - 1)].rate / table.base_rate;
}

std::string render_decile_chart(const std::string& title, const DecileTable& table) {
  std::string out = title + "\n";
  out += "n=" + std::to_string(table.n) + " positives=" + std::to_string(table.positives) +
         " base_rate=" + format_fixed(table.base_rate, 4) + "\n";
  for (const auto& row : table.rows) {
    const auto marks = static_cast<std::size_t>(std::lround(row.rate * kChartWidth));
    std::string label = std::to_string(row.decile);
    if (label.size() < 2) label.insert(0, " ");
    out += label + " |" + std::string(marks, '#') + std::string(kChartWidth - marks, ' ') + "| " +
           format_fixed(row.rate, 4) + "\n";
  }
  return out;
}

std::vector<std::filesystem::path> render_decile_report(
    const std::map<std::string, DecileTable>& tables, const std::filesystem::path& out_dir) {
  if (tables.empty()) throw DataError("no decile tables to render");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create '" + out_dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> written;
  for (const auto& [group, table] : tables) {
    const auto csv_path = out_dir / ("decile_" + group + ".csv");
    {
      CsvWriter out(csv_path);
      out.row({"decile", "count", "positives", "rate", "lift"});
      for (const auto& row : table.rows) {
        out.field(row.decile).field(row.count).field(row.positives).field(row.rate);
        if (table.base_rate > 0) {
          out.field(row.rate / table.base_rate);
        } else {
          out.field("");
        }
        out.end_row();
      }
      out.flush();
    }
    const auto txt_path = out_dir / ("decile_" + group + ".txt");
    std::ofstream txt(txt_path, std::ios::binary | std::ios::trunc);
    txt << render_decile_chart("decile positive rate: " + group, table);
    if (!txt) throw Error("cannot write '" + txt_path.string() + "'");
    written.push_back(csv_path);
    written.push_back(txt_path);
  }
  return written;
}

}  // namespace outreach
