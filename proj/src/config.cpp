#include "edtsc/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace edtsc {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError(origin + ":" + std::to_string(lineno) +
                          ": malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg.values_[section.empty() ? key : section + "." + key] = val;
  }
  return cfg;
}

Config Config::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "': cannot parse '" +
                      it->second + "' as a number");
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": key '" + key + "': cannot parse '" +
                      it->second + "' as an integer");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError(origin_ + ": key '" + key + "': cannot parse '" + v +
                    "' as a boolean");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        const std::vector<double>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::istringstream ss(it->second);
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key '" + key + "': cannot parse list item '" +
                        tok + "' as a number");
    }
  }
  if (out.empty())
    throw ConfigError(origin_ + ": key '" + key + "': empty list");
  return out;
}

std::vector<std::string> Config::get_strings(
    const std::string& key, const std::vector<std::string>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::istringstream ss(it->second);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  if (out.empty())
    throw ConfigError(origin_ + ": key '" + key + "': empty list");
  return out;
}

}  // namespace edtsc
