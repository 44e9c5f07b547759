#include "wakegen/label_fusion.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <vector>

#include "wakegen/csv.hpp"
#include "wakegen/error.hpp"

namespace wakegen {

namespace {

std::string join(const std::set<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ", ";
    out += id;
  }
  return out;
}

std::set<std::string> intersection(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::set<std::string> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

std::set<std::string> subcategory_closure(const LabelHierarchy& h, const std::set<std::string>& seeds) {
  std::set<std::string> seen(seeds.begin(), seeds.end());
  std::deque<std::string> queue(seeds.begin(), seeds.end());
  while (!queue.empty()) {
    const std::string id = std::move(queue.front());
    queue.pop_front();
    for (const auto& child : h.children(id, Relation::subcategory)) {
      if (seen.insert(child).second) queue.push_back(child);
    }
  }
  return seen;
}

std::set<std::string> parse_id_list(std::string_view value) {
  std::set<std::string> ids;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto piece = csv::trim(value.substr(start, comma == std::string_view::npos
                                                         ? std::string_view::npos
                                                         : comma - start));
    if (!piece.empty()) ids.emplace(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return ids;
}

bool parse_bool(std::string_view v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("task spec key '" + key + "': expected true/false, got '" + std::string(v) + "'");
}

double parse_number(std::string_view v, const std::string& key) {
  if (auto d = csv::parse_double(v)) return *d;
  throw ConfigError("task spec key '" + key + "': expected a number, got '" + std::string(v) + "'");
}

}  // namespace

void TaskSpec::validate() const {
  if (label_name.empty() || label_name.find_first_of(",\"\n") != std::string::npos) {
    throw ConfigError("label_name must be non-empty and contain no commas or quotes");
  }
  if (target_label_ids.empty()) throw ConfigError("target_label_ids must not be empty");
  if (!(min_confidence >= 0.0 && min_confidence <= 10.0)) {
    throw ConfigError("min_confidence must lie in [0,10]");
  }
  if (!(min_area_fraction >= 0.0 && min_area_fraction <= 1.0)) {
    throw ConfigError("min_area_fraction must lie in [0,1]");
  }
  const std::pair<const char*, const std::set<std::string>*> sets[] = {
      {"target_label_ids", &target_label_ids},
      {"synonym_label_ids", &synonym_label_ids},
      {"core_part_label_ids", &core_part_label_ids}};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      const auto common = intersection(*sets[i].second, *sets[j].second);
      if (!common.empty()) {
        throw ConfigError(std::string(sets[i].first) + " and " + sets[j].first +
                          " overlap: " + join(common));
      }
    }
  }
}

TaskSpec parse_task_spec(std::istream& in) {
  TaskSpec spec;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = csv::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key(csv::trim(trimmed.substr(0, eq)));
    const auto value = csv::trim(trimmed.substr(eq + 1));
    if (!seen.insert(key).second) throw ParseError(line_no, "duplicate key '" + key + "'");
    if (key == "label_name") {
      spec.label_name = std::string(value);
    } else if (key == "target_label_ids") {
      spec.target_label_ids = parse_id_list(value);
    } else if (key == "synonym_label_ids") {
      spec.synonym_label_ids = parse_id_list(value);
    } else if (key == "core_part_label_ids") {
      spec.core_part_label_ids = parse_id_list(value);
    } else if (key == "treat_parts_as_target") {
      spec.treat_parts_as_target = parse_bool(value, key);
    } else if (key == "depiction_policy") {
      if (value == "negative") {
        spec.depiction_policy = DepictionPolicy::negative;
      } else if (value == "exclude") {
        spec.depiction_policy = DepictionPolicy::exclude;
      } else {
        throw ConfigError("depiction_policy must be 'negative' or 'exclude'");
      }
    } else if (key == "min_confidence") {
      spec.min_confidence = parse_number(value, key);
    } else if (key == "min_area_fraction") {
      spec.min_area_fraction = parse_number(value, key);
    } else if (key == "strict_negatives") {
      spec.strict_negatives = parse_bool(value, key);
    } else {
      throw ConfigError("unknown task spec key '" + key + "' on line " + std::to_string(line_no));
    }
  }
  spec.validate();
  return spec;
}

void write_task_spec(std::ostream& out, const TaskSpec& spec) {
  const auto list = [](const std::set<std::string>& ids) {
    std::string s;
    for (const auto& id : ids) s += (s.empty() ? "" : ",") + id;
    return s;
  };
  out << "label_name = " << spec.label_name << '\n'
      << "target_label_ids = " << list(spec.target_label_ids) << '\n'
      << "synonym_label_ids = " << list(spec.synonym_label_ids) << '\n'
      << "core_part_label_ids = " << list(spec.core_part_label_ids) << '\n'
      << "treat_parts_as_target = " << (spec.treat_parts_as_target ? "true" : "false") << '\n'
      << "depiction_policy = " << to_string(spec.depiction_policy) << '\n'
      << "min_confidence = " << csv::format_double(spec.min_confidence) << '\n'
      << "min_area_fraction = " << csv::format_double(spec.min_area_fraction) << '\n'
      << "strict_negatives = " << (spec.strict_negatives ? "true" : "false") << '\n';
}

ClassSet resolve_class_set(const LabelHierarchy& hierarchy, const TaskSpec& spec) {
  spec.validate();
  std::set<std::string> unknown;
  for (const auto* ids : {&spec.target_label_ids, &spec.core_part_label_ids}) {
    for (const auto& id : *ids) {
      if (!hierarchy.contains(id)) unknown.insert(id);
    }
  }
  if (!unknown.empty()) throw UnknownLabelError("label ids not in registry: " + join(unknown));

  std::set<std::string> seeds = spec.target_label_ids;
  seeds.insert(spec.core_part_label_ids.begin(), spec.core_part_label_ids.end());
  const auto box_positive = subcategory_closure(hierarchy, seeds);

  ClassSet cs;
  cs.positive_ids = box_positive;
  for (const auto& id : subcategory_closure(hierarchy, spec.synonym_label_ids)) {
    if (cs.positive_ids.insert(id).second) cs.image_level_only_ids.insert(id);
  }

  std::set<std::string> part_seeds;
  for (const auto& id : subcategory_closure(hierarchy, spec.target_label_ids)) {
    for (const auto& part : hierarchy.children(id, Relation::part)) part_seeds.insert(part);
  }
  for (const auto& id : subcategory_closure(hierarchy, part_seeds)) {
    if (!cs.positive_ids.count(id)) cs.conditional_part_ids.insert(id);
  }
  return cs;
}

ClassRole class_role(const ClassSet& cs, const TaskSpec& spec, const std::string& label_id,
                     bool box_annotation) {
  if (cs.positive_ids.count(label_id)) {
    if (box_annotation && cs.image_level_only_ids.count(label_id)) return ClassRole::other;
    return ClassRole::positive;
  }
  if (cs.conditional_part_ids.count(label_id)) {
    return spec.treat_parts_as_target ? ClassRole::positive : ClassRole::disabled_part;
  }
  return ClassRole::other;
}

bool is_consistent(const TriLabel& label) {
  switch (label.reason) {
    case LabelReason::confident_match: return label.value == TriValue::positive;
    case LabelReason::verified_absent:
    case LabelReason::part_only_disabled: return label.value == TriValue::negative;
    case LabelReason::low_confidence:
    case LabelReason::small_subject_only: return label.value == TriValue::excluded;
    case LabelReason::depiction_only:
    case LabelReason::no_annotation: return label.value != TriValue::positive;
  }
  return false;
}

TriLabel image_level_label(std::span<const ImageLevelLabel> labels, const ClassSet& cs,
                           const TaskSpec& spec) {
  bool confident = false;
  bool low = false;
  bool absent = false;
  bool disabled_part = false;
  for (const auto& l : labels) {
    const ClassRole role = class_role(cs, spec, l.label_id, false);
    if (role == ClassRole::other) continue;
    // A zero score is an absence, never evidence of presence.
    const bool passes = l.confidence > 0.0 && l.confidence >= spec.min_confidence;
    if (role == ClassRole::disabled_part) {
      disabled_part = disabled_part || passes;
      continue;
    }
    if (passes) {
      confident = true;
    } else if (l.confidence > 0.0) {
      low = true;
    } else if (l.source == LabelSource::human_verified) {
      absent = true;
    }
  }
  if (confident) return {TriValue::positive, LabelReason::confident_match};
  if (low) return {TriValue::excluded, LabelReason::low_confidence};
  if (disabled_part) return {TriValue::negative, LabelReason::part_only_disabled};
  if (absent) return {TriValue::negative, LabelReason::verified_absent};
  if (spec.strict_negatives) return {TriValue::excluded, LabelReason::no_annotation};
  return {TriValue::negative, LabelReason::no_annotation};
}

bool has_label_conflict(std::span<const ImageLevelLabel> labels, const ClassSet& cs,
                        const TaskSpec& spec) {
  if (image_level_label(labels, cs, spec).value != TriValue::positive) return false;
  return std::any_of(labels.begin(), labels.end(), [&](const ImageLevelLabel& l) {
    return l.source == LabelSource::human_verified && l.confidence == 0.0 &&
           class_role(cs, spec, l.label_id, false) == ClassRole::positive;
  });
}

std::string_view to_string(TriValue v) {
  switch (v) {
    case TriValue::positive: return "positive";
    case TriValue::negative: return "negative";
    case TriValue::excluded: break;
  }
  return "excluded";
}

std::string_view to_string(LabelReason r) {
  switch (r) {
    case LabelReason::confident_match: return "confident_match";
    case LabelReason::verified_absent: return "verified_absent";
    case LabelReason::low_confidence: return "low_confidence";
    case LabelReason::small_subject_only: return "small_subject_only";
    case LabelReason::depiction_only: return "depiction_only";
    case LabelReason::no_annotation: return "no_annotation";
    case LabelReason::part_only_disabled: break;
  }
  return "part_only_disabled";
}

std::string_view to_string(DepictionPolicy p) {
  return p == DepictionPolicy::negative ? "negative" : "exclude";
}

}  // namespace wakegen
