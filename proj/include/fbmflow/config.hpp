#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace fbmflow::config {

/// Flat `key = value` document. `[section]` headers prefix the keys that
/// follow with `section.`; dotted keys may also be written directly. Order of
/// keys is irrelevant; rendering is sorted by key.
class KeyValues {
 public:
  static KeyValues parse(const std::string& text);
  static KeyValues load(const std::filesystem::path& file);

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

  /// `key = value` lines, sorted, each prefixed with `prefix`.
  std::string render(const std::string& prefix = "") const;

 private:
  std::map<std::string, std::string> values_;
};

double parse_double(const std::string& s, const std::string& what);
long long parse_int(const std::string& s, const std::string& what);
std::uint64_t parse_uint64(const std::string& s, const std::string& what);

}  // namespace fbmflow::config
