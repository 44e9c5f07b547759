#pragma once

#include <span>

#include "wakegen/label_fusion.hpp"
#include "wakegen/oi_ingest.hpp"

namespace wakegen {

struct BoxDecision {
  TriLabel label;
  double max_positive_area = 0.0;  // largest non-depiction positive-class box
  bool has_person_depiction = false;     // a positive-class box flagged as a depiction
  bool has_nonperson_depiction = false;  // any other box flagged as a depiction
  bool has_group_of = false;             // a real positive-class box is an IsGroupOf box

  friend bool operator==(const BoxDecision&, const BoxDecision&) = default;
};

// (x_max - x_min) * (y_max - y_min).
double box_area_fraction(const BoxAnnotation& box);

// Per-image labeling from box annotations (all sharing one image id). Rules in order:
//   1. a real (non-depiction) positive-class box covering >= min_area_fraction -> positive
//   2. real positive-class boxes exist but all are smaller -> excluded (small_subject_only)
//   3. only depicted positive-class boxes -> negative or excluded per depiction_policy
//   4. otherwise -> negative
// Part boxes are positive-class only when treat_parts_as_target is set; a lone real part
// box with parts disabled yields negative/part_only_disabled.
BoxDecision classify_by_boxes(std::span<const BoxAnnotation> boxes, const ClassSet& cs,
                              const TaskSpec& spec);

}  // namespace wakegen
