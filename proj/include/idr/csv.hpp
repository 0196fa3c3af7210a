#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace idr {

// RFC-4180 quoting: quote when the field contains a comma, quote, or newline.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
  return out;
}

// Reads one CSV record (handles quoted fields spanning lines).
// Returns nullopt at end of stream.
std::optional<std::vector<std::string>> csv_read_row(std::istream& in);

}  // namespace idr
