#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat dotted-key configuration: `key = value` lines, `#` comments, no
// sections. Keys are [A-Za-z0-9_.]; values are everything after '=' up to a
// comment, trimmed. Lookups that fail to parse throw ConfigError naming the
// key, so typos and type errors surface before any computation.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_text(const std::string& text, const std::string& origin = "<config>");

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key) const;
  double get_real_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  std::vector<double> get_real_list(const std::string& key) const;

  // Hard error on any present key outside `allowed`, naming its line.
  void require_known(const std::set<std::string>& allowed, const std::string& context) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::string origin_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;

  const std::string& raw(const std::string& key) const;
};

}  // namespace sdlab
