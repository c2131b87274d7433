#pragma once

#include "sqz/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Run-configuration file format: nested key-value sections with mandatory
// unit suffixes on every physical quantity.
//
//   [geometry]
//   kind = random_slab        # chain | lattice2d | random_slab
//   lx = 30 nm
//   density = 1e18 cm^-3
//
// Frequencies (Hz/kHz/MHz) convert to angular rad/us with an explicit 2*pi
// here and nowhere else; rates already in rad/us use the "rad/us" suffix.
// Unknown sections or keys are rejected with their line number.

namespace sqz {

struct ConfigValue {
  std::string raw;
  int line = 0;
};

class Config {
public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& name = "<string>");

  // typed getters; key is "section.name"
  double get_time_us(const std::string& key) const;                // us, ms, s
  double get_freq_radus(const std::string& key) const;             // Hz/kHz/MHz -> 2 pi; rad/us
  double get_rate_perus(const std::string& key) const;             // Hz/kHz/MHz -> 1/us; 1/us
  double get_length_nm(const std::string& key) const;              // nm, um
  double get_density_nm3(const std::string& key) const;            // nm^-3, cm^-3
  double get_number(const std::string& key) const;                 // dimensionless
  long get_integer(const std::string& key) const;
  std::uint64_t get_seed(const std::string& key) const;
  std::string get_word(const std::string& key) const;

  template <typename T>
  T get_or(const std::string& key, T fallback) const;

  bool has(const std::string& key) const;

  // every key must be consumed by one of the getters; leftovers are errors
  void require_all_consumed() const;

  const std::string& name() const { return name_; }
  std::string canonical_text() const; // sorted key = raw form, for hashing
  std::uint64_t hash() const;

private:
  [[noreturn]] void fail(const ConfigValue& v, const std::string& msg) const;
  const ConfigValue& lookup(const std::string& key) const;
  double parse_with_units(const std::string& key,
                          const std::vector<std::pair<std::string, double>>& units,
                          bool allow_bare = false) const;

  std::string name_;
  std::map<std::string, ConfigValue> values_;
  mutable std::map<std::string, bool> consumed_;
};

} // namespace sqz
