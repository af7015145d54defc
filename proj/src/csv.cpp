#include "bigthick/csv.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "bigthick/error.hpp"

namespace bigthick::csv {

bool read_row(std::istream& in, Row& row) {
  row.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (int c = in.get(); c != std::char_traits<char>::eof(); c = in.get()) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field.push_back(static_cast<char>(c));
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field.push_back(static_cast<char>(c));
    }
  }
  if (quoted) throw ValidationError("csv: unterminated quoted field");
  row.push_back(std::move(field));
  return any;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << escape(row[i]);
  }
  out << '\n';
}

Table Table::read(std::istream& in) {
  Table t;
  if (!read_row(in, t.header_)) return t;
  Row row;
  while (read_row(in, row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != t.header_.size()) {
      throw ValidationError(fmt::format("csv: row {} has {} fields, header has {}", t.rows_.size() + 2, row.size(),
                                        t.header_.size()));
    }
    t.rows_.push_back(row);
  }
  return t;
}

Table Table::read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path));
  return read(in);
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header_.begin());
}

std::size_t Table::column(std::string_view name) const {
  if (auto c = find_column(name)) return *c;
  throw ValidationError(fmt::format("csv: missing column '{}'", name));
}

}  // namespace bigthick::csv
