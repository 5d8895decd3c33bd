#include "erblock/csv.hpp"

#include "erblock/error.hpp"

namespace erblock::csv {

std::optional<std::vector<std::string>> Reader::next() {
  int ch = in_.get();
  if (ch == std::char_traits<char>::eof()) return std::nullopt;

  row_line_ = line_;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool after_quote = false;

  while (true) {
    if (ch == std::char_traits<char>::eof()) {
      if (quoted) {
        fail(ErrorCode::Parse,
             "line " + std::to_string(row_line_) + ": unterminated quoted field");
      }
      fields.push_back(std::move(field));
      return fields;
    }
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line_;
        field.push_back(c);
      }
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      after_quote = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && in_.peek() == '\n') in_.get();
      ++line_;
      fields.push_back(std::move(field));
      return fields;
    } else if (c == '"') {
      if (!field.empty() || after_quote) {
        fail(ErrorCode::Parse,
             "line " + std::to_string(row_line_) + ": unexpected quote");
      }
      quoted = true;
    } else {
      if (after_quote) {
        fail(ErrorCode::Parse, "line " + std::to_string(row_line_) +
                                   ": text after closing quote");
      }
      field.push_back(c);
    }
    ch = in_.get();
  }
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

}  // namespace erblock::csv
