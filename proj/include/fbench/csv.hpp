#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fbench::csv {

/// Splits one comma-delimited line; strips a trailing '\r' and surrounding spaces.
std::vector<std::string> split(std::string_view line);

/// Parses a full cell as a double; throws SchemaError naming `what` otherwise.
double to_double(std::string_view cell, const std::string& what);
long long to_int(std::string_view cell, const std::string& what);

/// Shortest representation that parses back to the identical double.
std::string fmt(double v);

/// Reads a whole CSV with a header; returns header and rows of cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// Column index by name; throws SchemaError naming the column if absent.
  std::size_t column(const std::string& name) const;
};
Table read(std::istream& in);
Table read_file(const std::string& path);

}  // namespace fbench::csv
