#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace locdist {

// Locale-independent shortest-safe decimal (17 significant digits), with
// "inf"/"-inf" for the infinite sentinels.
std::string format_double(double v);
double parse_double(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
  std::size_t column(std::string_view name) const;
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace locdist
