#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace outreach {

// Streaming RFC-4180 reader: comma separated, double-quote quoting with ""
// escapes, quoted fields may span lines, CRLF or LF line endings.
class CsvReader {
 public:
  explicit CsvReader(const std::filesystem::path& path);
  explicit CsvReader(std::string_view text);

  // Reads the next row into `fields`, reusing its storage. Returns false at
  // end of input. A blank line yields a single empty field.
  bool next(std::vector<std::string>& fields);

  // 1-based physical line on which the most recently returned row started.
  std::size_t line() const noexcept { return row_line_; }

 private:
  int get();
  int peek();

  std::unique_ptr<std::istream> owned_;
  std::istream* in_ = nullptr;
  std::size_t line_ = 1;
  std::size_t row_line_ = 0;
};

// Reads a whole CSV into memory; first row is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column position by name or -1.
  int column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text);

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  explicit CsvWriter(std::ostream& out);

  CsvWriter& field(std::string_view value);
  CsvWriter& field(double value);
  CsvWriter& field(long long value);
  CsvWriter& field(std::size_t value) { return field(static_cast<long long>(value)); }
  CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
  CsvWriter& field(const char* value) { return field(std::string_view(value)); }
  CsvWriter& field(const std::string& value) { return field(std::string_view(value)); }
  void end_row();

  void row(const std::vector<std::string>& values);

  void flush();

 private:
  std::unique_ptr<std::ofstream> owned_;
  std::ostream* out_;
  bool first_in_row_ = true;
};

// Appends `value` to `out` with RFC-4180 quoting when needed.
void append_csv_field(std::string& out, std::string_view value);

}  // namespace outreach
