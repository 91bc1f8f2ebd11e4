#include "sigseg/csv.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include "sigseg/error.hpp"

namespace sigseg::csv {

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Table read(const std::filesystem::path& path, std::string_view expected_header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedFile, path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) {
    throw Error(ErrorCode::MalformedFile,
                path.string() + ": expected header '" + std::string(expected_header) + "'");
  }
  t.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.header.size()) {
      throw Error(ErrorCode::MalformedFile, path.string() + ": wrong field count in '" + line + "'");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

double to_double(const std::string& field) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size()) {
    throw Error(ErrorCode::MalformedFile, "not a number: '" + field + "'");
  }
  return v;
}

long long to_int(const std::string& field) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::MalformedFile, "not an integer: '" + field + "'");
  }
  return v;
}

}  // namespace sigseg::csv
