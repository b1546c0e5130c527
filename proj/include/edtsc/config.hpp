#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace edtsc {

// Raised for malformed config files, bad values, and bad CLI argument
// combinations. The CLI maps it to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a simulation state stops being finite. Exit code 2.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat typed key-value configuration with [section] headers and '#' comments.
//
//   [vehicle]
//   mass_kg = 260.0      # comments run to end of line
//
// Keys are addressed as "section.key". Typed getters fall back to a default
// when the key is absent and throw ConfigError on malformed values.
class Config {
 public:
  Config() = default;

  // Parses text; `origin` names the source in error messages.
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  // Whitespace-separated lists.
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key,
                                       const std::vector<std::string>& fallback) const;

  // CLI-style override, e.g. set("sim.dt", "0.005").
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  const std::map<std::string, std::string>& raw() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_ = "<config>";
};

}  // namespace edtsc
