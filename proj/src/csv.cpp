#include "sqz/csv.hpp"

#include <charconv>
#include <stdexcept>

namespace sqz {

CsvWriter::CsvWriter(std::uint64_t config_hash, std::uint64_t seed,
                     std::vector<std::string> columns,
                     const std::vector<std::string>& extra_comments)
    : n_cols_(columns.size()) {
  out_ << "# version: " << kCodeVersion << '\n';
  out_ << "# config-hash: " << std::hex << config_hash << std::dec << '\n';
  out_ << "# seed: " << seed << '\n';
  for (const auto& c : extra_comments) out_ << "# " << c << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i)
    out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
  out_ << '\n';
}

std::string CsvWriter::format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != n_cols_) throw std::invalid_argument("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i)
    out_ << format_double(values[i]) << (i + 1 < values.size() ? "," : "");
  out_ << '\n';
}

void CsvWriter::row_mixed(const std::vector<std::string>& values) {
  if (values.size() != n_cols_) throw std::invalid_argument("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i)
    out_ << values[i] << (i + 1 < values.size() ? "," : "");
  out_ << '\n';
}

} // namespace sqz
