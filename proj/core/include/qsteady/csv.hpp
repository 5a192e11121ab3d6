#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace qsteady {

using CsvCell = std::variant<std::string, double, std::int64_t>;

/// Writes one result table. The first line is a comment carrying the schema
/// name and version, the config hash and the seed list; the second is the
/// header. Doubles are written with 17 significant digits so that values
/// round-trip exactly.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& schema, const std::string& config_hash,
            const std::string& seeds, std::vector<std::string> columns);

  void row(const std::vector<CsvCell>& cells);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t ncols_;
};

std::string format_double(double x);
std::string csv_escape(const std::string& s);

}  // namespace qsteady
