#pragma once

// Streaming readers for Open-Images-format metadata: image-level labels, box
// annotations, the label hierarchy (flat edge list), and MIAP demographics.

#include <cstddef>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace wakegen {

enum class LabelSource { human_verified, machine_generated };

struct ImageLevelLabel {
  std::string image_id;
  std::string label_id;
  LabelSource source = LabelSource::machine_generated;
  double confidence = 0.0;  // 0..10 scale

  friend bool operator==(const ImageLevelLabel&, const ImageLevelLabel&) = default;
};

struct BoxAnnotation {
  std::string image_id;
  std::string label_id;
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  bool is_depiction = false;
  bool is_group_of = false;
  bool is_inside = false;

  friend bool operator==(const BoxAnnotation&, const BoxAnnotation&) = default;
};

enum class GenderPresentation { feminine, masculine, unknown };
enum class AgePresentation { young, middle, older, unknown };

struct MiapAnnotation {
  std::string image_id;
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  GenderPresentation gender_presentation = GenderPresentation::unknown;
  AgePresentation age_presentation = AgePresentation::unknown;

  friend bool operator==(const MiapAnnotation&, const MiapAnnotation&) = default;
};

enum class Relation { subcategory, part };

struct HierarchyEdge {
  std::string parent;
  std::string child;
  Relation relation = Relation::subcategory;

  friend auto operator<=>(const HierarchyEdge&, const HierarchyEdge&) = default;
};

// Directed parent->child edges per relation plus a registry of known label ids.
// Edges are deduplicated; every edge endpoint is registered.
class LabelHierarchy {
 public:
  void add_edge(const std::string& parent, const std::string& child, Relation relation);
  void register_label(const std::string& label_id) { registry_.insert(label_id); }

  bool contains(const std::string& label_id) const { return registry_.count(label_id) != 0; }
  const std::vector<std::string>& children(const std::string& label_id, Relation relation) const;

  const std::set<HierarchyEdge>& edges() const noexcept { return edges_; }
  const std::set<std::string>& registry() const noexcept { return registry_; }
  bool empty() const noexcept { return edges_.empty(); }

  // Throws HierarchyError naming one cycle if any relation is cyclic.
  void validate_acyclic() const;

 private:
  std::set<HierarchyEdge> edges_;
  std::set<std::string> registry_;
  std::map<std::string, std::vector<std::string>> subcategories_;
  std::map<std::string, std::vector<std::string>> parts_;
};

// A rejected row. Row-level problems do not abort a parse.
struct RowError {
  std::size_t line = 0;
  std::string message;
};

template <class T>
struct ParseResult {
  std::vector<T> records;
  std::vector<RowError> rejects;
  std::vector<std::string> warnings;
  std::size_t rows_in = 0;  // == records.size() + rejects.size()
};

// Scale of the Confidence column. Open Images exports store 0..1 fractions;
// `detect` rescales by 10 when the largest accepted value is <= 1.
enum class ConfidenceScale { detect, unit, tenths };

using RejectSink = std::function<void(RowError&&)>;

// Columns ImageID, Source, LabelName, Confidence.
ParseResult<ImageLevelLabel> parse_image_labels(std::istream& in,
                                                ConfidenceScale scale = ConfidenceScale::detect);

// Single-pass variant; `scale` must be unit or tenths since detection needs the whole file.
// Returns rows_in.
std::size_t for_each_image_label(std::istream& in, ConfidenceScale scale,
                                 const std::function<void(ImageLevelLabel&&)>& on_record,
                                 const RejectSink& on_reject);

// Columns ImageID, LabelName, XMin, XMax, YMin, YMax, IsGroupOf, IsDepiction, IsInside.
ParseResult<BoxAnnotation> parse_boxes(std::istream& in);
std::size_t for_each_box(std::istream& in,
                         const std::function<void(BoxAnnotation&&)>& on_record,
                         const RejectSink& on_reject);

// One `parent,child,relation` edge per line; blank lines and '#' comments ignored.
LabelHierarchy parse_hierarchy(std::istream& in);

// Columns ImageID, XMin, XMax, YMin, YMax, GenderPresentation, AgePresentation.
// Unrecognised vocabulary maps to unknown with a warning.
ParseResult<MiapAnnotation> parse_miap(std::istream& in);

GenderPresentation parse_gender_presentation(std::string_view token, bool* recognised = nullptr);
AgePresentation parse_age_presentation(std::string_view token, bool* recognised = nullptr);

// Writers emit the canonical column sets accepted by the parsers above.
void write_image_labels(std::ostream& out, std::span<const ImageLevelLabel> labels);
void write_boxes(std::ostream& out, std::span<const BoxAnnotation> boxes);
void write_hierarchy(std::ostream& out, const LabelHierarchy& hierarchy);
void write_miap(std::ostream& out, std::span<const MiapAnnotation> rows);

std::string_view to_string(LabelSource s);
std::string_view to_string(Relation r);
std::string_view to_string(GenderPresentation g);
std::string_view to_string(AgePresentation a);

}  // namespace wakegen
