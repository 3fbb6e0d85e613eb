#include "sdlab/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace sdlab {

namespace {

bool is_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || c == '.';
}

std::string trim(const std::string& s) {
  size_t lo = 0;
  size_t hi = s.size();
  while (lo < hi && (s[lo] == ' ' || s[lo] == '\t')) ++lo;
  while (hi > lo && (s[hi - 1] == ' ' || s[hi - 1] == '\t' || s[hi - 1] == '\r')) --hi;
  return s.substr(lo, hi - lo);
}

[[noreturn]] void parse_fail(const std::string& origin, int line, size_t column,
                             const std::string& what) {
  throw ConfigError("config: " + origin + " line " + std::to_string(line) + ", column " +
                    std::to_string(column + 1) + ": " + what);
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("config: cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str(), path);
}

Config Config::from_text(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size() || line[i] == '\r') continue;
    const size_t key_start = i;
    while (i < line.size() && is_key_char(line[i])) ++i;
    if (i == key_start) {
      parse_fail(origin, lineno, key_start, "expected a key ([A-Za-z0-9_.])");
    }
    const std::string key = line.substr(key_start, i - key_start);
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size() || line[i] != '=') {
      parse_fail(origin, lineno, i, "expected '=' after key '" + key + "'");
    }
    const std::string value = trim(line.substr(i + 1));
    if (value.empty()) {
      parse_fail(origin, lineno, i + 1, "empty value for key '" + key + "'");
    }
    if (cfg.values_.count(key)) {
      parse_fail(origin, lineno, key_start,
                 "duplicate key '" + key + "' (first defined on line " +
                     std::to_string(cfg.lines_.at(key)) + ")");
    }
    cfg.values_[key] = value;
    cfg.lines_[key] = lineno;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

const std::string& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError("config: required key '" + key + "' is missing");
  }
  return it->second;
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

std::string Config::get_string_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? values_.at(key) : fallback;
}

namespace {

double parse_real(const std::string& key, const std::string& value) {
  const char* s = value.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0' || errno == ERANGE) {
    throw ConfigError("config: key '" + key + "': expected a real number, got '" + value + "'");
  }
  return v;
}

}  // namespace

double Config::get_real(const std::string& key) const { return parse_real(key, raw(key)); }

double Config::get_real_or(const std::string& key, double fallback) const {
  return has(key) ? parse_real(key, values_.at(key)) : fallback;
}

long long Config::get_int(const std::string& key) const {
  const std::string& value = raw(key);
  const char* s = value.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s, &end, 10);
  if (end == s || *end != '\0' || errno == ERANGE) {
    throw ConfigError("config: key '" + key + "': expected an integer, got '" + value + "'");
  }
  return v;
}

long long Config::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64_or(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& value = values_.at(key);
  const char* s = value.c_str();
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (end == s || *end != '\0' || errno == ERANGE || value[0] == '-') {
    throw ConfigError("config: key '" + key + "': expected an unsigned integer, got '" + value +
                      "'");
  }
  return v;
}

bool Config::get_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& value = values_.at(key);
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("config: key '" + key + "': expected true or false, got '" + value + "'");
}

std::vector<double> Config::get_real_list(const std::string& key) const {
  const std::string& value = raw(key);
  std::vector<double> out;
  size_t start = 0;
  while (start <= value.size()) {
    size_t comma = value.find(',', start);
    if (comma == std::string::npos) comma = value.size();
    const std::string piece = trim(value.substr(start, comma - start));
    if (piece.empty()) {
      throw ConfigError("config: key '" + key + "': empty element in list '" + value + "'");
    }
    out.push_back(parse_real(key, piece));
    start = comma + 1;
  }
  return out;
}

void Config::require_known(const std::set<std::string>& allowed,
                           const std::string& context) const {
  for (const auto& [key, value] : values_) {
    if (!allowed.count(key)) {
      throw ConfigError("config: unknown key '" + key + "' (line " +
                        std::to_string(lines_.at(key)) + ") for " + context);
    }
  }
}

}  // namespace sdlab
