#include "dsekit/config.hpp"

#include <fstream>
#include <sstream>

namespace dsekit {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) {
    return "";
  }
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

ConfigMap ConfigMap::from_string(const std::string& text) {
  ConfigMap cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') {
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected 'key = value'", line_no);
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ParseError("empty key", line_no);
    }
    if (cfg.entries_.count(key)) {
      throw ParseError("duplicate key '" + key + "'", line_no);
    }
    cfg.entries_[key] = Entry{value, line_no};
  }
  return cfg;
}

ConfigMap ConfigMap::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open config: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

const ConfigMap::Entry* ConfigMap::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    return nullptr;
  }
  read_.insert(key);
  return &it->second;
}

bool ConfigMap::has(const std::string& key) const {
  return find(key) != nullptr;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  const Entry* e = find(key);
  if (!e) {
    return fallback;
  }
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(e->value, &consumed);
  } catch (const std::exception&) {
    throw ParseError("key '" + key + "': not a number", e->line);
  }
  if (consumed != e->value.size()) {
    throw ParseError("key '" + key + "': trailing characters", e->line);
  }
  return v;
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  const Entry* e = find(key);
  if (!e) {
    return fallback;
  }
  try {
    std::size_t consumed = 0;
    const long v = std::stol(e->value, &consumed);
    if (consumed != e->value.size()) {
      throw std::invalid_argument("trailing");
    }
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ParseError("key '" + key + "': not an integer", e->line);
  }
}

std::uint64_t ConfigMap::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  const Entry* e = find(key);
  if (!e) {
    return fallback;
  }
  try {
    std::size_t consumed = 0;
    const unsigned long long v = std::stoull(e->value, &consumed);
    if (consumed != e->value.size()) {
      throw std::invalid_argument("trailing");
    }
    return v;
  } catch (const std::exception&) {
    throw ParseError("key '" + key + "': not an unsigned integer", e->line);
  }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  const Entry* e = find(key);
  if (!e) {
    return fallback;
  }
  if (e->value == "true" || e->value == "1") {
    return true;
  }
  if (e->value == "false" || e->value == "0") {
    return false;
  }
  throw ParseError("key '" + key + "': expected true/false", e->line);
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

std::vector<double> ConfigMap::get_doubles(
    const std::string& key, const std::vector<double>& fallback) const {
  const Entry* e = find(key);
  if (!e) {
    return fallback;
  }
  std::vector<double> values;
  std::istringstream ss(e->value);
  std::string tok;
  while (ss >> tok) {
    std::size_t consumed = 0;
    try {
      values.push_back(std::stod(tok, &consumed));
    } catch (const std::exception&) {
      throw ParseError("key '" + key + "': not a number: '" + tok + "'",
                       e->line);
    }
    if (consumed != tok.size()) {
      throw ParseError("key '" + key + "': bad number: '" + tok + "'",
                       e->line);
    }
  }
  if (values.empty()) {
    throw ParseError("key '" + key + "': empty list", e->line);
  }
  return values;
}

std::vector<std::pair<std::string, int>> ConfigMap::unread_keys() const {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& [key, entry] : entries_) {
    if (!read_.count(key)) {
      out.emplace_back(key, entry.line);
    }
  }
  return out;
}

int ConfigMap::line_of(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

}  // namespace dsekit
