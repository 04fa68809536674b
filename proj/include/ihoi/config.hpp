#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ihoi {

struct ConfigKey {
  std::string key;
  std::string default_value;
  std::string help;
};

/// Every engine option, with its default. Config files and CLI flags may only
/// set keys listed here.
const std::vector<ConfigKey>& config_schema();

/// Flat key=value configuration. Values are kept as strings; typed getters
/// parse on access and fall back to the schema default.
class Config {
 public:
  Config();  // schema defaults

  static Config from_file(const std::string& path);
  void set(const std::string& key, const std::string& value);  // throws on unknown key
  void apply_file(const std::string& path);

  std::string get(const std::string& key) const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;

  /// Canonical "key = value" listing (schema order); also what gets hashed.
  std::string serialize() const;
  std::uint64_t hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace ihoi
