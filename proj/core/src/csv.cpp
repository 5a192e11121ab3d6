#include "qsteady/csv.hpp"

#include <cmath>
#include <cstdio>

#include "qsteady/errors.hpp"

namespace qsteady {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvWriter::CsvWriter(const std::string& path, const std::string& schema, const std::string& config_hash,
                     const std::string& seeds, std::vector<std::string> columns)
    : path_(path), out_(path), ncols_(columns.size()) {
  if (!out_) throw ConfigError("cannot open output file '" + path + "'");
  out_ << "# qsteady schema=" << schema << "/1 config_hash=" << config_hash << " seed=" << seeds << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  if (cells.size() != ncols_) {
    throw ContractError("CSV row for " + path_ + " has " + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(ncols_));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [this](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::string>) {
            out_ << csv_escape(v);
          } else if constexpr (std::is_same_v<T, double>) {
            out_ << format_double(v);
          } else {
            out_ << v;
          }
        },
        cells[i]);
  }
  out_ << '\n';
  out_.flush();
}

}  // namespace qsteady
