#include "idr/csv.hpp"

#include "idr/errors.hpp"

namespace idr {

std::optional<std::vector<std::string>> csv_read_row(std::istream& in) {
  int c = in.get();
  if (c == EOF) return std::nullopt;
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  while (true) {
    if (c == EOF) {
      if (quoted) throw DataError("csv: unterminated quoted field");
      fields.push_back(std::move(cur));
      return fields;
    }
    char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          cur += '"';
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"' && cur.empty()) {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      fields.push_back(std::move(cur));
      return fields;
    } else {
      cur += ch;
    }
    c = in.get();
  }
}

}  // namespace idr
