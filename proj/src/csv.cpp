#include "csv.hpp"

#include <charconv>
#include <cstdlib>

#include "railwarn/error.hpp"

namespace railwarn::detail {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

CsvTable read_csv(std::istream& in, const std::vector<std::string>& expected,
                  const std::string& what) {
  CsvTable table;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cells = split_csv_line(t);
    if (!have_header) {
      if (!expected.empty() && cells != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw ConfigError(what + ": line " + std::to_string(line_no) + ": expected header '" +
                          want + "'");
      }
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ConfigError(what + ": line " + std::to_string(line_no) + ": expected " +
                        std::to_string(table.header.size()) + " columns, got " +
                        std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw ConfigError(what + ": missing header");
  return table;
}

double parse_double(const std::string& cell, const std::string& what, int line) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size()) {
    throw ConfigError(what + ": line " + std::to_string(line) + ": not a number: '" + cell + "'");
  }
  return v;
}

long long parse_int(const std::string& cell, const std::string& what, int line) {
  long long v = 0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc{} || ptr != last) {
    throw ConfigError(what + ": line " + std::to_string(line) + ": not an integer: '" + cell +
                      "'");
  }
  return v;
}

}  // namespace railwarn::detail
