#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sigseg::csv {

// Minimal reader for the unquoted comma-separated files this project writes.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table read(const std::filesystem::path& path, std::string_view expected_header);

double to_double(const std::string& field);
long long to_int(const std::string& field);

}  // namespace sigseg::csv
