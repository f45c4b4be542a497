#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dsekit/errors.hpp"

namespace dsekit {

/// Flat `key = value` file with dotted section prefixes, `#` comments
/// and blank lines. Keys are tracked as they are read so a loader can
/// reject typos (see unread_keys). Errors carry line numbers.
class ConfigMap {
 public:
  static ConfigMap load(const std::filesystem::path& path);
  static ConfigMap from_string(const std::string& text);

  bool has(const std::string& key) const;

  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  /// Whitespace-separated list of numbers.
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;

  /// Keys present in the file that were never read; each with its line.
  std::vector<std::pair<std::string, int>> unread_keys() const;

  int line_of(const std::string& key) const;

 private:
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> read_;

  const Entry* find(const std::string& key) const;
};

}  // namespace dsekit
