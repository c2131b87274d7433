#include "sqz/config.hpp"

#include "sqz/constants.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace sqz {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

} // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& name) {
  Config c;
  c.name_ = name;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(name + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(name + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(name + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key or value");
    if (section.empty())
      throw ConfigError(name + ":" + std::to_string(lineno) + ": key outside any section");
    const std::string full = section + "." + key;
    if (c.values_.count(full))
      throw ConfigError(name + ":" + std::to_string(lineno) + ": duplicate key '" + full + "'");
    c.values_[full] = {val, lineno};
  }
  return c;
}

void Config::fail(const ConfigValue& v, const std::string& msg) const {
  throw ConfigError(name_ + ":" + std::to_string(v.line) + ": " + msg);
}

const ConfigValue& Config::lookup(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(name_ + ": missing required key '" + key + "'");
  consumed_[key] = true;
  return it->second;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

double Config::parse_with_units(const std::string& key,
                                const std::vector<std::pair<std::string, double>>& units,
                                bool allow_bare) const {
  const ConfigValue& v = lookup(key);
  std::istringstream ss(v.raw);
  double x;
  if (!(ss >> x)) fail(v, "key '" + key + "': not a number");
  std::string unit;
  ss >> unit;
  std::string rest;
  if (ss >> rest) fail(v, "key '" + key + "': trailing content '" + rest + "'");
  if (unit.empty()) {
    if (allow_bare) return x;
    std::string expected;
    for (const auto& [u, f] : units) expected += (expected.empty() ? "" : ", ") + u;
    fail(v, "key '" + key + "': missing unit suffix (expected one of: " + expected + ")");
  }
  for (const auto& [u, f] : units)
    if (unit == u) return x * f;
  fail(v, "key '" + key + "': unknown unit '" + unit + "'");
}

double Config::get_time_us(const std::string& key) const {
  return parse_with_units(key, {{"us", 1.0}, {"ms", 1e3}, {"s", 1e6}, {"ns", 1e-3}});
}

double Config::get_freq_radus(const std::string& key) const {
  const double two_pi = 2.0 * constants::pi;
  return parse_with_units(key, {{"Hz", two_pi * 1e-6},
                                {"kHz", two_pi * 1e-3},
                                {"MHz", two_pi},
                                {"GHz", two_pi * 1e3},
                                {"rad/us", 1.0}});
}

double Config::get_rate_perus(const std::string& key) const {
  return parse_with_units(key, {{"Hz", 1e-6}, {"kHz", 1e-3}, {"MHz", 1.0}, {"1/us", 1.0}});
}

double Config::get_length_nm(const std::string& key) const {
  return parse_with_units(key, {{"nm", 1.0}, {"um", 1e3}, {"A", 0.1}});
}

double Config::get_density_nm3(const std::string& key) const {
  return parse_with_units(key, {{"nm^-3", 1.0}, {"cm^-3", 1e-21}});
}

double Config::get_number(const std::string& key) const {
  return parse_with_units(key, {}, /*allow_bare=*/true);
}

long Config::get_integer(const std::string& key) const {
  const ConfigValue& v = lookup(key);
  std::istringstream ss(v.raw);
  long x;
  if (!(ss >> x)) fail(v, "key '" + key + "': not an integer");
  std::string rest;
  if (ss >> rest) fail(v, "key '" + key + "': trailing content");
  return x;
}

std::uint64_t Config::get_seed(const std::string& key) const {
  const ConfigValue& v = lookup(key);
  std::istringstream ss(v.raw);
  std::uint64_t x;
  if (!(ss >> x)) fail(v, "key '" + key + "': not a valid seed");
  return x;
}

std::string Config::get_word(const std::string& key) const {
  const ConfigValue& v = lookup(key);
  const std::string w = trim(v.raw);
  if (w.find_first_of(" \t") != std::string::npos) fail(v, "key '" + key + "': expected one word");
  return w;
}

template <typename T>
T Config::get_or(const std::string& key, T fallback) const {
  if (!has(key)) return fallback;
  if constexpr (std::is_same_v<T, long>) return get_integer(key);
  else if constexpr (std::is_same_v<T, std::uint64_t>) return get_seed(key);
  else if constexpr (std::is_same_v<T, double>) return get_number(key);
  else if constexpr (std::is_same_v<T, std::string>) return get_word(key);
}

template long Config::get_or<long>(const std::string&, long) const;
template std::uint64_t Config::get_or<std::uint64_t>(const std::string&, std::uint64_t) const;
template double Config::get_or<double>(const std::string&, double) const;
template std::string Config::get_or<std::string>(const std::string&, std::string) const;

void Config::require_all_consumed() const {
  for (const auto& [key, v] : values_) {
    if (!consumed_.count(key))
      throw ConfigError(name_ + ":" + std::to_string(v.line) + ": unknown key '" + key + "'");
  }
}

std::string Config::canonical_text() const {
  std::string out;
  for (const auto& [key, v] : values_) {
    out += key;
    out += '=';
    out += v.raw;
    out += '\n';
  }
  return out;
}

std::uint64_t Config::hash() const {
  // FNV-1a over the canonical text
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : canonical_text()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

} // namespace sqz
