#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

// CSV emission with a reproducibility header. Formatting is locked to
// shortest-round-trip doubles so identical runs produce identical bytes.

namespace sqz {

inline constexpr const char* kCodeVersion = "1.0.0";

class CsvWriter {
public:
  CsvWriter(std::uint64_t config_hash, std::uint64_t seed, std::vector<std::string> columns,
            const std::vector<std::string>& extra_comments = {});

  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& values);

  std::string str() const { return out_.str(); }
  static std::string format_double(double v);

private:
  std::ostringstream out_;
  std::size_t n_cols_;
};

} // namespace sqz
