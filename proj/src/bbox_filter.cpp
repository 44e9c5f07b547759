#include "wakegen/bbox_filter.hpp"

#include <algorithm>

namespace wakegen {

double box_area_fraction(const BoxAnnotation& box) {
  return (box.x_max - box.x_min) * (box.y_max - box.y_min);
}

BoxDecision classify_by_boxes(std::span<const BoxAnnotation> boxes, const ClassSet& cs,
                              const TaskSpec& spec) {
  BoxDecision d;
  bool real_positive = false;
  bool real_disabled_part = false;
  for (const auto& box : boxes) {
    const ClassRole role = class_role(cs, spec, box.label_id, true);
    if (box.is_depiction) {
      if (role == ClassRole::positive) {
        d.has_person_depiction = true;
      } else {
        d.has_nonperson_depiction = true;
      }
      continue;
    }
    if (role == ClassRole::disabled_part) {
      real_disabled_part = true;
    } else if (role == ClassRole::positive) {
      real_positive = true;
      d.max_positive_area = std::max(d.max_positive_area, box_area_fraction(box));
      d.has_group_of = d.has_group_of || box.is_group_of;
    }
  }

  if (real_positive && d.max_positive_area >= spec.min_area_fraction) {
    d.label = {TriValue::positive, LabelReason::confident_match};
  } else if (real_positive) {
    d.label = {TriValue::excluded, LabelReason::small_subject_only};
  } else if (d.has_person_depiction) {
    d.label = {spec.depiction_policy == DepictionPolicy::negative ? TriValue::negative
                                                                  : TriValue::excluded,
               LabelReason::depiction_only};
  } else if (real_disabled_part) {
    d.label = {TriValue::negative, LabelReason::part_only_disabled};
  } else {
    d.label = {TriValue::negative, LabelReason::no_annotation};
  }
  return d;
}

}  // namespace wakegen
