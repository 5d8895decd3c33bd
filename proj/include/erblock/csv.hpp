#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace erblock::csv {

/// Streaming RFC 4180 reader: quoted fields may contain commas, doubled
/// quotes and line breaks. Accepts LF or CRLF row terminators.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next row, or nullopt at end of input. Throws Error(Parse) naming the
  /// line on an unterminated quote or stray quote inside an unquoted field.
  std::optional<std::vector<std::string>> next();

  /// 1-based line on which the most recently returned row started.
  std::size_t line() const noexcept { return row_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t row_line_ = 0;
};

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace erblock::csv
