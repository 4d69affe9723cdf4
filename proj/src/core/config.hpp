// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: flat `key = value` text with `#` comments. Every key has
// a registered default (except `seed`, which must be given) and can be
// overridden from the command line.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pmtune {

struct ConfigKey {
  const char* name;
  const char* default_value;  // nullptr: mandatory
  const char* help;
};

const std::vector<ConfigKey>& config_keys();

class Config {
 public:
  // Throws ErrorCode::config on syntax errors or unknown keys.
  static Config from_file(const std::string& path);
  static Config from_text(const std::string& text, const std::string& source = "<text>");

  void set(const std::string& key, const std::string& value);  // validates the key
  bool has(const std::string& key) const;  // explicitly set

  std::string str(const std::string& key) const;
  double num(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  std::vector<double> num_list(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;
  std::uint64_t seed() const;  // throws if unset

  const std::map<std::string, std::string>& explicit_values() const { return values_; }
  // All keys with their effective values, for the run record.
  std::map<std::string, std::string> effective() const;

 private:
  std::string raw(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

}  // namespace pmtune
