#include "fattree/harness/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fattree::harness {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(&out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) *out_ << ',';
    *out_ << header[i];
  }
  *out_ << '\n';
}

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (filled_ >= columns_) throw std::logic_error("CSV row has too many cells");
  if (filled_) *out_ << ',';
  *out_ << v;
  ++filled_;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_number(v)); }
CsvWriter& CsvWriter::cell(std::int64_t v) { return cell(std::to_string(v)); }
CsvWriter& CsvWriter::cell(std::uint64_t v) { return cell(std::to_string(v)); }

void CsvWriter::end_row() {
  if (filled_ != columns_) throw std::logic_error("CSV row has too few cells");
  *out_ << '\n';
  filled_ = 0;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw FormatError("missing column '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (first) {
      table.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw FormatError("line " + std::to_string(lineno) + ": expected " +
                        std::to_string(table.header.size()) + " cells, got " +
                        std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace fattree::harness
