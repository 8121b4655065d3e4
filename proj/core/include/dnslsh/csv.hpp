#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dnslsh {

struct CsvRow {
  std::size_t line = 0;  ///< physical line where the row starts (1-based)
  std::vector<std::string> fields;
};

/// RFC 4180 reader: comma separated, double-quote quoting, quoted fields may
/// contain commas, quotes ("") and line breaks. Accepts LF or CRLF.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  /// Reads the next row; returns false at end of input. Throws RowError on
  /// an unterminated quoted field.
  bool next(CsvRow& row);

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, std::span<const std::string> fields);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
/// Strict full-string parse; throws std::invalid_argument.
double parse_double(std::string_view text);

}  // namespace dnslsh
