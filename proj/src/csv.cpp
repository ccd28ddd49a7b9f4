#include "fbmflow/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace fbmflow::csv {

std::string format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::invalid_argument("csv: no column named '" + name + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

Table read(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("csv: cannot open " + file.string());
  Table t;
  std::string line;
  bool have_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto cells = split(line, ',');
    if (!have_header) {
      for (auto& c : cells) t.header.push_back(trim(c));
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw std::runtime_error("csv: " + file.string() + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(t.header.size()) + " fields");
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto& c : cells) {
      std::size_t used = 0;
      const std::string cell = trim(c);
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || cell.empty())
        throw std::runtime_error("csv: " + file.string() + ":" + std::to_string(lineno) + ": bad number '" + cell +
                                 "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::runtime_error("csv: " + file.string() + " has no header");
  return t;
}

}  // namespace fbmflow::csv
