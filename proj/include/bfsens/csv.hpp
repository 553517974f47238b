#pragma once

// Minimal CSV helpers. Fields never contain commas or quotes; numbers are
// written with 17 significant digits so doubles round-trip exactly.

#include <iosfwd>
#include <string>
#include <vector>

namespace bfsens::csv {

std::string format_double(double x);
// Parses a full-field double; "NA" parses to NaN. Throws ValidationError
// naming `context` on malformed input.
double parse_double(const std::string& field, const std::string& context);
long long parse_int(const std::string& field, const std::string& context);

std::vector<std::string> split(const std::string& line);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws ValidationError when absent.
  std::size_t column(const std::string& name) const;
};

// Reads a header line and all non-empty rows, checking the field count.
Table read(std::istream& in);

}  // namespace bfsens::csv
