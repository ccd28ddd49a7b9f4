#include "fbmflow/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fbmflow/csv.hpp"

namespace fbmflow::config {

double parse_double(const std::string& s, const std::string& what) {
  const std::string v = csv::trim(s);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size()) throw std::invalid_argument(what + ": not a number: '" + s + "'");
  return out;
}

long long parse_int(const std::string& s, const std::string& what) {
  const std::string v = csv::trim(s);
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size()) throw std::invalid_argument(what + ": not an integer: '" + s + "'");
  return out;
}

std::uint64_t parse_uint64(const std::string& s, const std::string& what) {
  const std::string v = csv::trim(s);
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    if (!v.empty() && v.front() != '-') out = std::stoull(v, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size()) throw std::invalid_argument(what + ": not an unsigned integer: '" + s + "'");
  return out;
}

KeyValues KeyValues::parse(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = csv::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad section");
      section = csv::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = csv::trim(line.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    kv.values_[key] = csv::trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> KeyValues::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double KeyValues::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  return v ? parse_double(*v, key) : fallback;
}

long long KeyValues::get_int(const std::string& key, long long fallback) const {
  auto v = get(key);
  return v ? parse_int(*v, key) : fallback;
}

std::uint64_t KeyValues::get_uint64(const std::string& key, std::uint64_t fallback) const {
  auto v = get(key);
  return v ? parse_uint64(*v, key) : fallback;
}

std::string KeyValues::render(const std::string& prefix) const {
  std::string out;
  for (const auto& [k, v] : values_) out += prefix + k + " = " + v + "\n";
  return out;
}

}  // namespace fbmflow::config
