#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace ietrial::cli {

enum class Format { csv, json };

Format parse_format(const std::string& s);

// Missing values print as an empty CSV field and as JSON null.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string, bool>;

struct Report {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

// CSV: header row, rates with 6 significant digits, integers raw.
void write_csv(std::ostream& out, const Report& r);
// JSON: array of objects, doubles at full round-trip precision.
void write_json(std::ostream& out, const Report& r);
void write_report(std::ostream& out, const Report& r, Format f);

// Writes to `path`, or stdout when empty. Throws IoError.
void emit(const Report& r, Format f, const std::string& path);

}  // namespace ietrial::cli
