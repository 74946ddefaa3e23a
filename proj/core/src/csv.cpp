#include "outreach/csv.hpp"

#include <sstream>

#include "outreach/error.hpp"
#include "outreach/format.hpp"

namespace outreach {

CsvReader::CsvReader(const std::filesystem::path& path) {
  auto file = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*file) throw DataError("cannot open '" + path.string() + "'");
  owned_ = std::move(file);
  in_ = owned_.get();
}

CsvReader::CsvReader(std::string_view text) {
  owned_ = std::make_unique<std::istringstream>(std::string(text));
  in_ = owned_.get();
}

int CsvReader::get() {
  const int c = in_->rdbuf()->sbumpc();
  if (c == '\n') ++line_;
  return c;
}

int CsvReader::peek() { return in_->rdbuf()->sgetc(); }

bool CsvReader::next(std::vector<std::string>& fields) {
  constexpr int kEof = std::char_traits<char>::eof();
  if (peek() == kEof) return false;
  row_line_ = line_;

  std::size_t count = 0;
  auto begin_field = [&]() -> std::string& {
    if (count == fields.size()) fields.emplace_back();
    std::string& f = fields[count++];
    f.clear();
    return f;
  };

  std::string* field = &begin_field();
  bool quoted = false;
  bool at_field_start = true;
  for (;;) {
    const int c = get();
    if (c == kEof) break;
    if (quoted) {
      if (c == '"') {
        if (peek() == '"') {
          get();
          field->push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field->push_back(static_cast<char>(c));
      }
      continue;
    }
    if (c == '"' && at_field_start) {
      quoted = true;
      at_field_start = false;
      continue;
    }
    if (c == ',') {
      field = &begin_field();
      at_field_start = true;
      continue;
    }
    if (c == '\r') {
      if (peek() == '\n') get();
      break;
    }
    if (c == '\n') break;
    field->push_back(static_cast<char>(c));
    at_field_start = false;
  }
  if (quoted) throw DataError("unterminated quoted field starting on line " +
                              std::to_string(row_line_));
  fields.resize(count);
  return true;
}

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

CsvTable read_all(CsvReader& reader) {
  CsvTable table;
  if (!reader.next(table.header)) return table;
  std::vector<std::string> row;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  CsvReader reader(path);
  return read_all(reader);
}

CsvTable parse_csv(std::string_view text) {
  CsvReader reader(text);
  return read_all(reader);
}

void append_csv_field(std::string& out, std::string_view value) {
  const bool needs_quotes =
      value.find_first_of(",\"\r\n") != std::string_view::npos ||
      (!value.empty() && (value.front() == ' ' || value.back() == ' '));
  if (!needs_quotes) {
    out.append(value);
    return;
  }
  out.push_back('"');
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

CsvWriter::CsvWriter(const std::filesystem::path& path) {
  owned_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*owned_) throw DataError("cannot write '" + path.string() + "'");
  out_ = owned_.get();
}

CsvWriter::CsvWriter(std::ostream& out) : out_(&out) {}

CsvWriter& CsvWriter::field(std::string_view value) {
  std::string buf;
  if (!first_in_row_) buf.push_back(',');
  append_csv_field(buf, value);
  out_->write(buf.data(), static_cast<std::streamsize>(buf.size()));
  first_in_row_ = false;
  return *this;
}

CsvWriter& CsvWriter::field(double value) { return field(format_double(value)); }

CsvWriter& CsvWriter::field(long long value) { return field(std::to_string(value)); }

void CsvWriter::end_row() {
  out_->put('\n');
  first_in_row_ = true;
}

void CsvWriter::row(const std::vector<std::string>& values) {
  for (const auto& v : values) field(v);
  end_row();
}

void CsvWriter::flush() {
  out_->flush();
  if (!*out_) throw DataError("write failed");
}

}  // namespace outreach
