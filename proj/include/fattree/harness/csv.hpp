#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fattree::harness {

// Shortest round-trippable decimal form, locale-independent.
std::string format_number(double v);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(const char* v) { return cell(std::string(v)); }
  CsvWriter& cell(double v);
  CsvWriter& cell(std::int64_t v);
  CsvWriter& cell(int v) { return cell(static_cast<std::int64_t>(v)); }
  CsvWriter& cell(std::uint64_t v);
  void end_row();

 private:
  std::ostream* out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  bool empty() const { return header.empty(); }
  // Index of a column; throws FormatError naming the missing column.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

}  // namespace fattree::harness
