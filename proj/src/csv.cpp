#include "wakegen/csv.hpp"

#include <charconv>
#include <cmath>

#include "wakegen/error.hpp"

namespace wakegen::csv {

std::optional<std::vector<std::string>> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool quoted_field = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && !quoted_field && trim(field).empty()) {
      field.clear();
      in_quotes = true;
      quoted_field = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      quoted_field = false;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) return std::nullopt;
  fields.push_back(std::move(field));
  return fields;
}

bool Reader::next_line(std::string& line) {
  while (std::getline(in_, line)) {
    ++line_number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) return true;
  }
  return false;
}

Header::Header(std::vector<std::string> names) : names_(std::move(names)) {
  for (auto& n : names_) n = std::string(trim(n));
  // Tolerate a UTF-8 byte-order mark on the first column.
  if (!names_.empty() && names_[0].rfind("\xEF\xBB\xBF", 0) == 0) names_[0].erase(0, 3);
}

std::optional<std::size_t> Header::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Header::require(std::string_view name) const {
  if (auto idx = find(name)) return *idx;
  throw SchemaError("missing required column '" + std::string(name) + "'");
}

Header read_header(Reader& reader) {
  std::string line;
  if (!reader.next_line(line)) throw SchemaError("empty input: header row required");
  auto fields = split_line(line);
  if (!fields) throw ParseError(reader.line_number(), "unterminated quote in header");
  return Header(std::move(*fields));
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

namespace {

template <class T>
std::optional<T> parse_whole(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

}  // namespace

std::optional<double> parse_double(std::string_view s) {
  auto v = parse_whole<double>(s);
  if (v && !std::isfinite(*v)) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(std::string_view s) { return parse_whole<long long>(s); }

std::optional<unsigned long long> parse_uint(std::string_view s) {
  return parse_whole<unsigned long long>(s);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
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

void write_row(std::ostream& out, std::span<const std::string> fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.put(',');
    out << escape(fields[i]);
  }
  out.put('\n');
}

}  // namespace wakegen::csv
