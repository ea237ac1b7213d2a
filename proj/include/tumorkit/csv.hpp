#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tumorkit::csv {

using Row = std::vector<std::string>;

// Splits one CSV record. Double-quoted fields may contain commas and doubled
// quotes; throws ParseError(line) on an unterminated quote.
Row split_line(std::string_view line, std::size_t line_no);

// Reads every non-empty line. Trailing '\r' is stripped.
struct Table {
  std::vector<Row> rows;
  std::vector<std::size_t> line_numbers;
};
Table read_file(const std::filesystem::path& path);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text, std::size_t line_no);
std::size_t parse_size(std::string_view text, std::size_t line_no);

std::string join(const Row& fields);

}  // namespace tumorkit::csv
