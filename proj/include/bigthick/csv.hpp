#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace bigthick::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader: quoted fields, doubled quotes, embedded separators and
/// newlines. Returns false at end of input.
bool read_row(std::istream& in, Row& row);

void write_row(std::ostream& out, const Row& row);
std::string escape(std::string_view field);

/// Header-addressed table.
class Table {
 public:
  static Table read(std::istream& in);
  static Table read_file(const std::string& path);

  const Row& header() const { return header_; }
  const std::vector<Row>& rows() const { return rows_; }
  /// Column index; throws ValidationError naming the missing column.
  std::size_t column(std::string_view name) const;
  std::optional<std::size_t> find_column(std::string_view name) const;

 private:
  Row header_;
  std::vector<Row> rows_;
};

}  // namespace bigthick::csv
