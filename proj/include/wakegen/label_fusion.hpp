#pragma once

#include <istream>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "wakegen/oi_ingest.hpp"

namespace wakegen {

enum class DepictionPolicy { negative, exclude };

// Target-class configuration. Defaults follow the person-detection setup:
// parts count as the target, depictions are negatives, confidence >= 7, area >= 5%.
struct TaskSpec {
  std::string label_name = "person";  // column name used in the output CSVs
  std::set<std::string> target_label_ids;
  std::set<std::string> synonym_label_ids;    // image-level labeling only
  std::set<std::string> core_part_label_ids;  // positive regardless of treat_parts_as_target
  bool treat_parts_as_target = true;
  DepictionPolicy depiction_policy = DepictionPolicy::negative;
  double min_confidence = 7.0;
  double min_area_fraction = 0.05;
  // Image-level negatives require a human-verified absence instead of merely no label.
  bool strict_negatives = false;

  // Throws ConfigError on out-of-range thresholds, empty targets, or overlapping id sets.
  void validate() const;
};

// Reads `key = value` lines ('#' comments). Keys are the TaskSpec field names; id sets
// are comma-separated. Unknown keys are an error.
TaskSpec parse_task_spec(std::istream& in);
void write_task_spec(std::ostream& out, const TaskSpec& spec);

struct ClassSet {
  std::set<std::string> positive_ids;          // closure of targets + synonyms + core parts
  std::set<std::string> conditional_part_ids;  // gated by treat_parts_as_target
  std::set<std::string> image_level_only_ids;  // synonyms; ignored by the box labeler

  friend bool operator==(const ClassSet&, const ClassSet&) = default;
};

// How a label id participates in labeling once the part flag is applied.
enum class ClassRole { positive, disabled_part, other };

ClassRole class_role(const ClassSet& cs, const TaskSpec& spec, const std::string& label_id,
                     bool box_annotation);

ClassSet resolve_class_set(const LabelHierarchy& hierarchy, const TaskSpec& spec);

enum class TriValue { positive, negative, excluded };

enum class LabelReason {
  confident_match,
  verified_absent,
  low_confidence,
  small_subject_only,
  depiction_only,
  no_annotation,
  part_only_disabled,
};

struct TriLabel {
  TriValue value = TriValue::negative;
  LabelReason reason = LabelReason::no_annotation;

  friend bool operator==(const TriLabel&, const TriLabel&) = default;
};

// Whether `reason` may accompany `value`.
bool is_consistent(const TriLabel& label);

// Tri-state label for one image from its image-level labels (all sharing one image id).
TriLabel image_level_label(std::span<const ImageLevelLabel> labels, const ClassSet& cs,
                           const TaskSpec& spec);

// True when the image is positive and one of its positive-class labels is also
// human-verified absent. Positive wins; callers count these for the report.
bool has_label_conflict(std::span<const ImageLevelLabel> labels, const ClassSet& cs,
                        const TaskSpec& spec);

std::string_view to_string(TriValue v);
std::string_view to_string(LabelReason r);
std::string_view to_string(DepictionPolicy p);

}  // namespace wakegen
