#include "wakegen/oi_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>

#include "wakegen/csv.hpp"
#include "wakegen/error.hpp"

namespace wakegen {

namespace {

const std::vector<std::string> kNoChildren;

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::optional<LabelSource> parse_source(std::string_view token) {
  token = csv::trim(token);
  if (iequals(token, "verification") || iequals(token, "crowdsource-verification") ||
      iequals(token, "human") || iequals(token, "human_verified")) {
    return LabelSource::human_verified;
  }
  if (iequals(token, "machine") || iequals(token, "machine_generated")) {
    return LabelSource::machine_generated;
  }
  return std::nullopt;
}

std::optional<bool> parse_flag(std::string_view token) {
  token = csv::trim(token);
  if (token == "0") return false;
  if (token == "1") return true;
  return std::nullopt;
}

// Rescale a 0..1 fraction to 0..10. Snapping to 1e-9 keeps 0.7 -> 7 exact.
double to_tenths(double unit_value) { return std::round(unit_value * 10.0 * 1e9) / 1e9; }

struct RowFields {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

// Reads data rows after the header, splitting each and checking there are enough
// fields for the highest required column index.
class RowStream {
 public:
  RowStream(csv::Reader& reader, std::size_t min_fields) : reader_(reader), min_fields_(min_fields) {}

  // Returns false at end of stream. On a malformed row, fills `error` and returns true
  // with `row.fields` empty.
  bool next(RowFields& row, std::optional<RowError>& error) {
    error.reset();
    if (!reader_.next_line(line_)) return false;
    row.line = reader_.line_number();
    auto fields = csv::split_line(line_);
    if (!fields) {
      error = RowError{row.line, "unterminated quoted field"};
      row.fields.clear();
      return true;
    }
    if (fields->size() < min_fields_) {
      error = RowError{row.line, "expected at least " + std::to_string(min_fields_) +
                                     " fields, found " + std::to_string(fields->size())};
      row.fields.clear();
      return true;
    }
    row.fields = std::move(*fields);
    return true;
  }

 private:
  csv::Reader& reader_;
  std::size_t min_fields_;
  std::string line_;
};

struct Coords {
  double x_min, x_max, y_min, y_max;
};

// Parses and validates four normalized coordinates; returns an error message on failure.
std::optional<std::string> parse_coords(const std::vector<std::string>& f, std::size_t ix0,
                                        std::size_t ix1, std::size_t iy0, std::size_t iy1,
                                        Coords& out) {
  const auto x0 = csv::parse_double(f[ix0]);
  const auto x1 = csv::parse_double(f[ix1]);
  const auto y0 = csv::parse_double(f[iy0]);
  const auto y1 = csv::parse_double(f[iy1]);
  if (!x0 || !x1 || !y0 || !y1) return "non-numeric coordinate";
  for (double v : {*x0, *x1, *y0, *y1}) {
    if (v < 0.0 || v > 1.0) return "coordinate " + csv::format_double(v) + " outside [0,1]";
  }
  if (*x0 > *x1) return "x_min > x_max";
  if (*y0 > *y1) return "y_min > y_max";
  out = {*x0, *x1, *y0, *y1};
  return std::nullopt;
}

std::size_t max_of(std::initializer_list<std::size_t> xs) {
  std::size_t m = 0;
  for (auto x : xs) m = std::max(m, x);
  return m;
}

struct ImageLabelColumns {
  std::size_t image, source, label, confidence;
};

ImageLabelColumns image_label_columns(const csv::Header& h) {
  return {h.require("ImageID"), h.require("Source"), h.require("LabelName"),
          h.require("Confidence")};
}

// Parses one image-label row with its raw (unscaled) confidence.
std::optional<std::string> parse_image_label_row(const std::vector<std::string>& f,
                                                 const ImageLabelColumns& c, double max_raw,
                                                 ImageLevelLabel& out) {
  const auto source = parse_source(f[c.source]);
  if (!source) return "unknown Source token '" + f[c.source] + "'";
  const auto conf = csv::parse_double(f[c.confidence]);
  if (!conf) return "non-numeric Confidence '" + f[c.confidence] + "'";
  if (*conf < 0.0 || *conf > max_raw) {
    return "Confidence " + csv::format_double(*conf) + " outside [0," +
           csv::format_double(max_raw) + "]";
  }
  const auto image = csv::trim(f[c.image]);
  const auto label = csv::trim(f[c.label]);
  if (image.empty()) return "empty ImageID";
  if (label.empty()) return "empty LabelName";
  out.image_id = std::string(image);
  out.label_id = std::string(label);
  out.source = *source;
  out.confidence = *conf;
  return std::nullopt;
}

std::optional<std::string> check_human_verified(const ImageLevelLabel& l) {
  if (l.source == LabelSource::human_verified && l.confidence != 0.0 && l.confidence != 10.0) {
    return "human-verified label must have confidence 0 or 10, found " +
           csv::format_double(l.confidence);
  }
  return std::nullopt;
}

}  // namespace

void LabelHierarchy::add_edge(const std::string& parent, const std::string& child,
                              Relation relation) {
  registry_.insert(parent);
  registry_.insert(child);
  if (!edges_.insert(HierarchyEdge{parent, child, relation}).second) return;
  auto& adjacency = relation == Relation::subcategory ? subcategories_ : parts_;
  adjacency[parent].push_back(child);
}

const std::vector<std::string>& LabelHierarchy::children(const std::string& label_id,
                                                         Relation relation) const {
  const auto& adjacency = relation == Relation::subcategory ? subcategories_ : parts_;
  const auto it = adjacency.find(label_id);
  return it == adjacency.end() ? kNoChildren : it->second;
}

void LabelHierarchy::validate_acyclic() const {
  for (Relation relation : {Relation::subcategory, Relation::part}) {
    const auto& adjacency = relation == Relation::subcategory ? subcategories_ : parts_;
    enum class Mark { white, grey, black };
    std::map<std::string, Mark> mark;
    for (const auto& [root, _] : adjacency) {
      if (mark[root] != Mark::white) continue;
      // Iterative DFS keeping the grey path so a back edge can be reported as a cycle.
      std::vector<std::pair<std::string, std::size_t>> stack{{root, 0}};
      mark[root] = Mark::grey;
      while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        const auto& kids = children(node, relation);
        if (next_child == kids.size()) {
          mark[node] = Mark::black;
          stack.pop_back();
          continue;
        }
        const std::string child = kids[next_child++];
        const Mark m = mark[child];
        if (m == Mark::grey) {
          std::string cycle;
          bool on_cycle = false;
          for (const auto& frame : stack) {
            if (frame.first == child) on_cycle = true;
            if (on_cycle) cycle += frame.first + " -> ";
          }
          cycle += child;
          throw HierarchyError("cycle in " + std::string(to_string(relation)) +
                               " relation: " + cycle);
        }
        if (m == Mark::white) {
          mark[child] = Mark::grey;
          stack.emplace_back(child, 0);
        }
      }
    }
  }
}

std::size_t for_each_image_label(std::istream& in, ConfidenceScale scale,
                                 const std::function<void(ImageLevelLabel&&)>& on_record,
                                 const RejectSink& on_reject) {
  if (scale == ConfidenceScale::detect) {
    throw ConfigError("streaming image-label parse needs an explicit confidence scale");
  }
  csv::Reader reader(in);
  const auto header = csv::read_header(reader);
  const auto cols = image_label_columns(header);
  RowStream rows(reader, max_of({cols.image, cols.source, cols.label, cols.confidence}) + 1);
  const double max_raw = scale == ConfidenceScale::unit ? 1.0 : 10.0;

  std::size_t rows_in = 0;
  RowFields row;
  std::optional<RowError> error;
  while (rows.next(row, error)) {
    ++rows_in;
    if (error) {
      on_reject(std::move(*error));
      continue;
    }
    ImageLevelLabel label;
    auto problem = parse_image_label_row(row.fields, cols, max_raw, label);
    if (!problem) {
      if (scale == ConfidenceScale::unit) label.confidence = to_tenths(label.confidence);
      problem = check_human_verified(label);
    }
    if (problem) {
      on_reject(RowError{row.line, std::move(*problem)});
    } else {
      on_record(std::move(label));
    }
  }
  return rows_in;
}

ParseResult<ImageLevelLabel> parse_image_labels(std::istream& in, ConfidenceScale scale) {
  ParseResult<ImageLevelLabel> result;
  if (scale != ConfidenceScale::detect) {
    result.rows_in = for_each_image_label(
        in, scale, [&](ImageLevelLabel&& l) { result.records.push_back(std::move(l)); },
        [&](RowError&& e) { result.rejects.push_back(std::move(e)); });
    return result;
  }

  // Detection needs the maximum over the file, so rows are held with their line numbers
  // until the scale is known.
  csv::Reader reader(in);
  const auto header = csv::read_header(reader);
  const auto cols = image_label_columns(header);
  RowStream rows(reader, max_of({cols.image, cols.source, cols.label, cols.confidence}) + 1);
  std::vector<std::pair<std::size_t, ImageLevelLabel>> pending;
  double max_seen = 0.0;
  RowFields row;
  std::optional<RowError> error;
  while (rows.next(row, error)) {
    ++result.rows_in;
    if (error) {
      result.rejects.push_back(std::move(*error));
      continue;
    }
    ImageLevelLabel label;
    if (auto problem = parse_image_label_row(row.fields, cols, 10.0, label)) {
      result.rejects.push_back(RowError{row.line, std::move(*problem)});
      continue;
    }
    max_seen = std::max(max_seen, label.confidence);
    pending.emplace_back(row.line, std::move(label));
  }

  const bool rescale = !pending.empty() && max_seen <= 1.0;
  result.records.reserve(pending.size());
  for (auto& [line, label] : pending) {
    if (rescale) label.confidence = to_tenths(label.confidence);
    if (auto problem = check_human_verified(label)) {
      result.rejects.push_back(RowError{line, std::move(*problem)});
    } else {
      result.records.push_back(std::move(label));
    }
  }
  std::stable_sort(result.rejects.begin(), result.rejects.end(),
                   [](const RowError& a, const RowError& b) { return a.line < b.line; });
  return result;
}

std::size_t for_each_box(std::istream& in, const std::function<void(BoxAnnotation&&)>& on_record,
                         const RejectSink& on_reject) {
  csv::Reader reader(in);
  const auto h = csv::read_header(reader);
  const std::size_t c_image = h.require("ImageID"), c_label = h.require("LabelName"),
                    c_x0 = h.require("XMin"), c_x1 = h.require("XMax"), c_y0 = h.require("YMin"),
                    c_y1 = h.require("YMax"), c_group = h.require("IsGroupOf"),
                    c_depiction = h.require("IsDepiction"), c_inside = h.require("IsInside");
  RowStream rows(reader, max_of({c_image, c_label, c_x0, c_x1, c_y0, c_y1, c_group, c_depiction,
                                 c_inside}) +
                             1);
  std::size_t rows_in = 0;
  RowFields row;
  std::optional<RowError> error;
  while (rows.next(row, error)) {
    ++rows_in;
    if (error) {
      on_reject(std::move(*error));
      continue;
    }
    const auto& f = row.fields;
    Coords c{};
    if (auto problem = parse_coords(f, c_x0, c_x1, c_y0, c_y1, c)) {
      on_reject(RowError{row.line, std::move(*problem)});
      continue;
    }
    const auto group = parse_flag(f[c_group]);
    const auto depiction = parse_flag(f[c_depiction]);
    const auto inside = parse_flag(f[c_inside]);
    if (!group || !depiction || !inside) {
      on_reject(RowError{row.line, "boolean flag must be 0 or 1"});
      continue;
    }
    const auto image = csv::trim(f[c_image]);
    const auto label = csv::trim(f[c_label]);
    if (image.empty() || label.empty()) {
      on_reject(RowError{row.line, "empty ImageID or LabelName"});
      continue;
    }
    on_record(BoxAnnotation{std::string(image), std::string(label), c.x_min, c.x_max, c.y_min,
                            c.y_max, *depiction, *group, *inside});
  }
  return rows_in;
}

ParseResult<BoxAnnotation> parse_boxes(std::istream& in) {
  ParseResult<BoxAnnotation> result;
  result.rows_in = for_each_box(
      in, [&](BoxAnnotation&& b) { result.records.push_back(std::move(b)); },
      [&](RowError&& e) { result.rejects.push_back(std::move(e)); });
  return result;
}

LabelHierarchy parse_hierarchy(std::istream& in) {
  LabelHierarchy hierarchy;
  csv::Reader reader(in);
  std::string line;
  while (reader.next_line(line)) {
    const auto trimmed = csv::trim(line);
    if (trimmed.front() == '#') continue;
    auto fields = csv::split_line(trimmed);
    if (!fields || fields->size() != 3) {
      throw ParseError(reader.line_number(), "expected 'parent,child,relation'");
    }
    const std::string parent(csv::trim((*fields)[0]));
    const std::string child(csv::trim((*fields)[1]));
    const auto relation_token = csv::trim((*fields)[2]);
    if (parent.empty() || child.empty()) {
      throw ParseError(reader.line_number(), "empty label id in edge");
    }
    Relation relation;
    if (iequals(relation_token, "subcategory")) {
      relation = Relation::subcategory;
    } else if (iequals(relation_token, "part")) {
      relation = Relation::part;
    } else if (reader.line_number() == 1 && iequals(relation_token, "relation")) {
      continue;  // optional header row
    } else {
      throw ParseError(reader.line_number(),
                       "unknown relation '" + std::string(relation_token) + "'");
    }
    hierarchy.add_edge(parent, child, relation);
  }
  hierarchy.validate_acyclic();
  return hierarchy;
}

GenderPresentation parse_gender_presentation(std::string_view token, bool* recognised) {
  token = csv::trim(token);
  if (recognised) *recognised = true;
  if (iequals(token, "Predominantly Feminine") || iequals(token, "feminine")) {
    return GenderPresentation::feminine;
  }
  if (iequals(token, "Predominantly Masculine") || iequals(token, "masculine")) {
    return GenderPresentation::masculine;
  }
  if (!iequals(token, "Unknown") && recognised) *recognised = false;
  return GenderPresentation::unknown;
}

AgePresentation parse_age_presentation(std::string_view token, bool* recognised) {
  token = csv::trim(token);
  if (recognised) *recognised = true;
  if (iequals(token, "Young")) return AgePresentation::young;
  if (iequals(token, "Middle")) return AgePresentation::middle;
  if (iequals(token, "Older")) return AgePresentation::older;
  if (!iequals(token, "Unknown") && recognised) *recognised = false;
  return AgePresentation::unknown;
}

ParseResult<MiapAnnotation> parse_miap(std::istream& in) {
  ParseResult<MiapAnnotation> result;
  csv::Reader reader(in);
  const auto h = csv::read_header(reader);
  const std::size_t c_image = h.require("ImageID"), c_x0 = h.require("XMin"),
                    c_x1 = h.require("XMax"), c_y0 = h.require("YMin"), c_y1 = h.require("YMax"),
                    c_gender = h.require("GenderPresentation"),
                    c_age = h.require("AgePresentation");
  RowStream rows(reader, max_of({c_image, c_x0, c_x1, c_y0, c_y1, c_gender, c_age}) + 1);
  RowFields row;
  std::optional<RowError> error;
  while (rows.next(row, error)) {
    ++result.rows_in;
    if (error) {
      result.rejects.push_back(std::move(*error));
      continue;
    }
    const auto& f = row.fields;
    Coords c{};
    if (auto problem = parse_coords(f, c_x0, c_x1, c_y0, c_y1, c)) {
      result.rejects.push_back(RowError{row.line, std::move(*problem)});
      continue;
    }
    const auto image = csv::trim(f[c_image]);
    if (image.empty()) {
      result.rejects.push_back(RowError{row.line, "empty ImageID"});
      continue;
    }
    bool gender_ok = true;
    bool age_ok = true;
    const auto gender = parse_gender_presentation(f[c_gender], &gender_ok);
    const auto age = parse_age_presentation(f[c_age], &age_ok);
    if (!gender_ok) {
      result.warnings.push_back("line " + std::to_string(row.line) +
                                ": unrecognised GenderPresentation '" + f[c_gender] +
                                "', using Unknown");
    }
    if (!age_ok) {
      result.warnings.push_back("line " + std::to_string(row.line) +
                                ": unrecognised AgePresentation '" + f[c_age] +
                                "', using Unknown");
    }
    result.records.push_back(
        MiapAnnotation{std::string(image), c.x_min, c.x_max, c.y_min, c.y_max, gender, age});
  }
  return result;
}

std::string_view to_string(LabelSource s) {
  return s == LabelSource::human_verified ? "verification" : "machine";
}

std::string_view to_string(Relation r) { return r == Relation::subcategory ? "subcategory" : "part"; }

std::string_view to_string(GenderPresentation g) {
  switch (g) {
    case GenderPresentation::feminine: return "Predominantly Feminine";
    case GenderPresentation::masculine: return "Predominantly Masculine";
    case GenderPresentation::unknown: break;
  }
  return "Unknown";
}

std::string_view to_string(AgePresentation a) {
  switch (a) {
    case AgePresentation::young: return "Young";
    case AgePresentation::middle: return "Middle";
    case AgePresentation::older: return "Older";
    case AgePresentation::unknown: break;
  }
  return "Unknown";
}

void write_image_labels(std::ostream& out, std::span<const ImageLevelLabel> labels) {
  out << "ImageID,Source,LabelName,Confidence\n";
  for (const auto& l : labels) {
    const std::string fields[] = {l.image_id, std::string(to_string(l.source)), l.label_id,
                                  csv::format_double(l.confidence)};
    csv::write_row(out, fields);
  }
}

void write_boxes(std::ostream& out, std::span<const BoxAnnotation> boxes) {
  out << "ImageID,LabelName,XMin,XMax,YMin,YMax,IsGroupOf,IsDepiction,IsInside\n";
  for (const auto& b : boxes) {
    const std::string fields[] = {b.image_id,
                                  b.label_id,
                                  csv::format_double(b.x_min),
                                  csv::format_double(b.x_max),
                                  csv::format_double(b.y_min),
                                  csv::format_double(b.y_max),
                                  b.is_group_of ? "1" : "0",
                                  b.is_depiction ? "1" : "0",
                                  b.is_inside ? "1" : "0"};
    csv::write_row(out, fields);
  }
}

void write_hierarchy(std::ostream& out, const LabelHierarchy& hierarchy) {
  for (const auto& e : hierarchy.edges()) {
    const std::string fields[] = {e.parent, e.child, std::string(to_string(e.relation))};
    csv::write_row(out, fields);
  }
}

void write_miap(std::ostream& out, std::span<const MiapAnnotation> rows) {
  out << "ImageID,XMin,XMax,YMin,YMax,GenderPresentation,AgePresentation\n";
  for (const auto& m : rows) {
    const std::string fields[] = {m.image_id,
                                  csv::format_double(m.x_min),
                                  csv::format_double(m.x_max),
                                  csv::format_double(m.y_min),
                                  csv::format_double(m.y_max),
                                  std::string(to_string(m.gender_presentation)),
                                  std::string(to_string(m.age_presentation))};
    csv::write_row(out, fields);
  }
}

}  // namespace wakegen
