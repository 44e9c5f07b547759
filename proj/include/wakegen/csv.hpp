#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wakegen::csv {

// Splits one CSV record. Supports double-quoted fields with "" escapes; embedded
// newlines are not supported. Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_line(std::string_view line);

// Pulls records from a stream one line at a time. Blank lines are skipped and a
// trailing '\r' is stripped so CRLF files parse like LF files.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Reads the next non-blank line into `line`. Returns false at end of stream.
  bool next_line(std::string& line);

  // 1-based number of the line most recently returned.
  std::size_t line_number() const noexcept { return line_number_; }

 private:
  std::istream& in_;
  std::size_t line_number_ = 0;
};

// Column lookup over a header row.
class Header {
 public:
  Header() = default;
  explicit Header(std::vector<std::string> names);

  std::optional<std::size_t> find(std::string_view name) const;

  // Index of a required column; throws SchemaError naming the column.
  std::size_t require(std::string_view name) const;

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
};

// Reads the header row of a CSV stream; throws SchemaError on an empty stream.
Header read_header(Reader& reader);

std::string_view trim(std::string_view s);

// Whole-field numeric parses; surrounding whitespace is tolerated.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);
std::optional<unsigned long long> parse_uint(std::string_view s);

// Shortest round-trippable decimal representation.
std::string format_double(double v);

// Quotes a field only when it contains a comma, quote, or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& out, std::span<const std::string> fields);

}  // namespace wakegen::csv
