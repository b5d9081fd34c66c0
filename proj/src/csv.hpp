#pragma once

// Minimal numeric CSV reader shared by the table loaders.

#include <istream>
#include <string>
#include <vector>

namespace railwarn::detail {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based source line of each row
};

std::vector<std::string> split_csv_line(const std::string& line);

/// Reads a header line and data rows, skipping blank lines and '#' comments.
/// Throws ConfigError if the header does not match `expected` (when given)
/// or a row has the wrong arity.
CsvTable read_csv(std::istream& in, const std::vector<std::string>& expected,
                  const std::string& what);

double parse_double(const std::string& cell, const std::string& what, int line);
long long parse_int(const std::string& cell, const std::string& what, int line);

}  // namespace railwarn::detail
