#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace spcl::csv {

/// Shortest round-trip decimal form; infinities become `inf` / `-inf`.
std::string format_number(double x);

/// Parses a decimal number, accepting `inf`, `-inf` and `+inf`. Throws
/// Error(kParse) mentioning `line_no` on failure.
double parse_number(std::string_view text, std::size_t line_no);

std::vector<std::string> split_row(std::string_view line);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// Reads a comma-separated table with a mandatory header row. Blank lines are
/// skipped; every data row must have as many fields as the header.
Table read_table(std::istream& in);

void write_row(std::ostream& out, const std::vector<double>& row);

}  // namespace spcl::csv
