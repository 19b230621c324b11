#include "fbench/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "fbench/errors.hpp"

namespace fbench::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> split(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view cell, const std::string& what) {
  cell = trim(cell);
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    throw SchemaError("unparseable number '" + std::string(cell) + "' in " + what);
  }
  return v;
}

long long to_int(std::string_view cell, const std::string& what) {
  cell = trim(cell);
  long long v = 0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    // Accept integral values written as floats, e.g. "3.0".
    const double d = to_double(cell, what);
    if (d != static_cast<double>(static_cast<long long>(d))) {
      throw SchemaError("non-integer value '" + std::string(cell) + "' in " + what);
    }
    return static_cast<long long>(d);
  }
  return v;
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw SchemaError("missing column '" + name + "'");
}

Table read(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty CSV: header row required");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    t.rows.push_back(split(line));
  }
  return t;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  return read(in);
}

}  // namespace fbench::csv
