#ifndef UNIFOLD_DATA_IO_HPP
#define UNIFOLD_DATA_IO_HPP

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "unifold/error.hpp"

namespace unifold {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Fields are separated by commas, semicolons, tabs or runs of spaces.
inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  const bool delimited = line.find_first_of(",;") != std::string_view::npos;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end;
    if (delimited) {
      end = line.find_first_of(",;", pos);
    } else {
      pos = line.find_first_not_of(" \t", pos);
      if (pos == std::string_view::npos) break;
      end = line.find_first_of(" \t", pos);
    }
    if (end == std::string_view::npos) end = line.size();
    fields.push_back(trim(line.substr(pos, end - pos)));
    pos = end + 1;
  }
  return fields;
}

}  // namespace detail

/*
 * Reads column `column` (1-based) of a plain text or CSV stream. Lines that
 * are blank or start with '#' are skipped; anything else must hold a finite
 * number in that column.
 */
inline std::vector<double> read_column(std::istream& in, std::size_t column = 1) {
  if (column == 0) {
    throw InvalidParameter("columns are numbered from 1");
  }
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = detail::split_fields(body);
    if (fields.size() < column) {
      throw ParseError("line has " + std::to_string(fields.size()) + " field(s), column " +
                           std::to_string(column) + " requested",
                       line_no);
    }
    const std::string_view field = fields[column - 1];
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (first != last && *first == '+') ++first;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
      throw ParseError("not a number: '" + std::string(field) + "'", line_no);
    }
    values.push_back(value);
  }
  return values;
}

inline std::vector<double> read_column(const std::filesystem::path& path,
                                       std::size_t column = 1) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return read_column(in, column);
}

/// One value per line with 17 significant digits, so re-reading is exact.
inline void write_column(const std::filesystem::path& path, const std::vector<double>& values) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (double v : values) out << v << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace unifold

#endif  // UNIFOLD_DATA_IO_HPP
