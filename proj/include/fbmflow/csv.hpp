#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fbmflow::csv {

/// Shortest round-trip-safe rendering used in every emitted file (17
/// significant digits, '.' separator).
std::string format(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

/// Parses a numeric CSV with one header line. Lines starting with '#' are
/// skipped.
Table read(const std::filesystem::path& file);

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);

}  // namespace fbmflow::csv
