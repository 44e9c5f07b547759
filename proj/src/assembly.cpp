#include "wakegen/assembly.hpp"

#include <set>
#include <unordered_map>
#include <unordered_set>

#include "wakegen/csv.hpp"
#include "wakegen/error.hpp"
#include "wakegen/parallel.hpp"

namespace wakegen {

namespace {

bool is_evaluation(Split s) { return s == Split::validation || s == Split::test; }

std::optional<bool> parse_bit(std::string_view s) {
  s = csv::trim(s);
  if (s == "0") return false;
  if (s == "1") return true;
  return std::nullopt;
}

const char* bit(bool b) { return b ? "1" : "0"; }

std::optional<TriValue> parse_tri_value(std::string_view s) {
  for (TriValue v : {TriValue::positive, TriValue::negative, TriValue::excluded}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

std::optional<LabelReason> parse_reason(std::string_view s) {
  for (LabelReason r : {LabelReason::confident_match, LabelReason::verified_absent,
                        LabelReason::low_confidence, LabelReason::small_subject_only,
                        LabelReason::depiction_only, LabelReason::no_annotation,
                        LabelReason::part_only_disabled}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

std::vector<std::string> label_columns(std::string_view label_name) {
  const std::string name(label_name);
  return {"file_name", name, "depiction_" + name, "depiction_non" + name};
}

}  // namespace

std::vector<ImageRecord> group_by_image(std::vector<ImageLevelLabel> labels,
                                        std::vector<BoxAnnotation> boxes) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<ImageRecord> records;
  const auto slot = [&](const std::string& id) -> ImageRecord& {
    auto [it, inserted] = index.try_emplace(id, records.size());
    if (inserted) records.push_back(ImageRecord{id, {}, {}});
    return records[it->second];
  };
  for (auto& l : labels) slot(l.image_id).labels.push_back(std::move(l));
  for (auto& b : boxes) slot(b.image_id).boxes.push_back(std::move(b));
  std::sort(records.begin(), records.end(),
            [](const ImageRecord& a, const ImageRecord& b) { return a.image_id < b.image_id; });
  return records;
}

std::string file_name_for(std::string_view image_id) { return std::string(image_id) + ".jpg"; }

std::string image_id_from_file_name(std::string_view file_name) {
  const auto dot = file_name.rfind('.');
  return std::string(dot == std::string_view::npos ? file_name : file_name.substr(0, dot));
}

SplitResult build_split(std::span<const ImageRecord> records, Labeler labeler, Split split,
                        const ClassSet& cs, const TaskSpec& spec, std::uint64_t seed,
                        unsigned workers) {
  if (is_evaluation(split) && labeler != Labeler::bounding_box) {
    throw ConfigError("validation and test splits must use the bounding-box labeler");
  }
  SplitResult result;
  result.decisions.resize(records.size());
  std::vector<std::uint8_t> conflicts(records.size(), 0);
  parallel_for(records.size(), workers, [&](std::size_t i) {
    const auto& r = records[i];
    auto& d = result.decisions[i];
    d.image_id = r.image_id;
    d.boxes = classify_by_boxes(r.boxes, cs, spec);
    if (labeler == Labeler::image_level) {
      d.label = image_level_label(r.labels, cs, spec);
      conflicts[i] = has_label_conflict(r.labels, cs, spec) ? 1 : 0;
    } else {
      d.label = d.boxes.label;
    }
  });

  auto& report = result.report;
  report.inputs = records.size();
  const Provenance provenance =
      labeler == Labeler::image_level ? Provenance::image_level : Provenance::bounding_box;
  std::vector<DatasetRow> pos;
  std::vector<DatasetRow> neg;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& d = result.decisions[i];
    report.label_conflicts += conflicts[i];
    if (d.label.value == TriValue::excluded) {
      ++report.excluded;
      ++report.excluded_by_reason[d.label.reason];
      continue;
    }
    DatasetRow row{d.image_id,
                   file_name_for(d.image_id),
                   static_cast<std::uint8_t>(d.label.value == TriValue::positive ? 1 : 0),
                   split,
                   d.boxes.has_person_depiction,
                   d.boxes.has_nonperson_depiction,
                   provenance};
    (row.label ? pos : neg).push_back(std::move(row));
  }
  const std::size_t labeled = pos.size() + neg.size();
  auto [kept_pos, kept_neg] = balance(std::move(pos), std::move(neg), seed);
  report.positives = kept_pos.size();
  report.negatives = kept_neg.size();
  report.balance_dropped = labeled - kept_pos.size() - kept_neg.size();

  result.rows = std::move(kept_pos);
  result.rows.insert(result.rows.end(), std::make_move_iterator(kept_neg.begin()),
                     std::make_move_iterator(kept_neg.end()));
  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const DatasetRow& a, const DatasetRow& b) { return a.image_id < b.image_id; });
  return result;
}

std::pair<std::vector<DatasetRow>, std::vector<DatasetRow>> balance(std::vector<DatasetRow> pos,
                                                                    std::vector<DatasetRow> neg,
                                                                    std::uint64_t seed) {
  return balance(std::move(pos), std::move(neg), seed,
                 [](const DatasetRow& r) -> const std::string& { return r.image_id; });
}

std::vector<LabelOverride> parse_overrides(std::istream& in) {
  csv::Reader reader(in);
  const auto header = csv::read_header(reader);
  const auto c_id = header.require("image_id");
  const auto c_label = header.require("label");
  std::vector<LabelOverride> out;
  std::string line;
  while (reader.next_line(line)) {
    auto fields = csv::split_line(line);
    if (!fields || fields->size() <= std::max(c_id, c_label)) {
      throw ParseError(reader.line_number(), "expected image_id,label");
    }
    const auto label = parse_bit((*fields)[c_label]);
    if (!label) throw ParseError(reader.line_number(), "label must be 0 or 1");
    out.push_back({std::string(csv::trim((*fields)[c_id])), static_cast<std::uint8_t>(*label)});
  }
  return out;
}

std::size_t apply_overrides(std::vector<DatasetRow>& rows,
                            std::span<const LabelOverride> overrides) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < rows.size(); ++i) index.emplace(rows[i].image_id, i);
  std::set<std::string> unknown;
  for (const auto& o : overrides) {
    if (!index.count(o.image_id)) unknown.insert(o.image_id);
  }
  if (!unknown.empty()) {
    std::string ids;
    for (const auto& id : unknown) ids += (ids.empty() ? "" : ", ") + id;
    throw UnknownLabelError("override ids not present in split: " + ids);
  }
  std::size_t changed = 0;
  for (const auto& o : overrides) {
    auto& row = rows[index.at(o.image_id)];
    if (row.label != o.label) ++changed;
    row.label = o.label;
    row.provenance = Provenance::manual_override;
  }
  return changed;
}

void check_split_hygiene(std::span<const DatasetRow> rows) {
  std::unordered_map<std::string, Split> evaluation;
  for (const auto& r : rows) {
    if (!is_evaluation(r.split)) continue;
    const auto [it, inserted] = evaluation.emplace(r.image_id, r.split);
    if (!inserted && it->second != r.split) {
      throw ConfigError("image " + r.image_id + " appears in both validation and test");
    }
  }
  for (const auto& r : rows) {
    if (is_evaluation(r.split)) continue;
    if (const auto it = evaluation.find(r.image_id); it != evaluation.end()) {
      throw ConfigError("image " + r.image_id + " appears in " + std::string(to_string(r.split)) +
                        " and " + std::string(to_string(it->second)));
    }
  }
}

void write_labels_csv(std::ostream& out, std::span<const DatasetRow> rows,
                      std::string_view label_name) {
  csv::write_row(out, label_columns(label_name));
  for (const auto& r : rows) {
    out << csv::escape(r.file_name) << ',' << int(r.label) << ',' << bit(r.depiction_person)
        << ',' << bit(r.depiction_nonperson) << '\n';
  }
}

void write_labels_csv(std::ostream& out, std::span<const DatasetRow> rows,
                      std::span<const BenchmarkFlags> flags, std::string_view label_name) {
  if (flags.size() != rows.size()) throw ConfigError("benchmark flags do not parallel rows");
  auto header = label_columns(label_name);
  for (Subset s : kAllSubsets) header.emplace_back(subset_name(s));
  csv::write_row(out, header);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out << csv::escape(r.file_name) << ',' << int(r.label) << ',' << bit(r.depiction_person)
        << ',' << bit(r.depiction_nonperson);
    for (Subset s : kAllSubsets) out << ',' << bit(in_subset(flags[i], s));
    out << '\n';
  }
}

LabelCsv read_labels_csv(std::istream& in, std::string_view label_name, Split split) {
  csv::Reader reader(in);
  const auto h = csv::read_header(reader);
  const auto names = label_columns(label_name);
  const std::size_t c_file = h.require(names[0]), c_label = h.require(names[1]),
                    c_dp = h.require(names[2]), c_dn = h.require(names[3]);
  std::array<std::optional<std::size_t>, kSubsetCount> c_subset;
  bool has_flags = false;
  for (std::size_t k = 0; k < kSubsetCount; ++k) {
    c_subset[k] = h.find(subset_name(kAllSubsets[k]));
    has_flags = has_flags || c_subset[k].has_value();
  }
  if (has_flags) {
    for (std::size_t k = 0; k < kSubsetCount; ++k) {
      if (!c_subset[k]) {
        throw SchemaError("missing benchmark column '" +
                          std::string(subset_name(kAllSubsets[k])) + "'");
      }
    }
  }

  LabelCsv result;
  std::string line;
  while (reader.next_line(line)) {
    const auto fields = csv::split_line(line);
    if (!fields || fields->size() < h.size()) {
      throw ParseError(reader.line_number(), "row has fewer fields than the header");
    }
    const auto& f = *fields;
    const auto label = parse_bit(f[c_label]);
    const auto dp = parse_bit(f[c_dp]);
    const auto dn = parse_bit(f[c_dn]);
    if (!label || !dp || !dn) throw ParseError(reader.line_number(), "expected 0/1 values");
    const std::string file(csv::trim(f[c_file]));
    result.rows.push_back(DatasetRow{image_id_from_file_name(file), file,
                                     static_cast<std::uint8_t>(*label), split, *dp, *dn,
                                     is_evaluation(split) ? Provenance::bounding_box
                                                          : Provenance::image_level});
    if (!has_flags) continue;

    std::array<bool, kSubsetCount> member{};
    for (std::size_t k = 0; k < kSubsetCount; ++k) {
      const auto b = parse_bit(f[*c_subset[k]]);
      if (!b) throw ParseError(reader.line_number(), "benchmark flags must be 0 or 1");
      member[k] = *b;
    }
    // Rebuild the optional-per-family representation; at most one member per family.
    const auto pick = [&](std::size_t first, std::size_t count, const char* family,
                          std::optional<std::size_t>& out) {
      for (std::size_t k = first; k < first + count; ++k) {
        if (!member[k]) continue;
        if (out) {
          throw ParseError(reader.line_number(),
                           std::string("multiple ") + family + " flags set");
        }
        out = k - first;
      }
    };
    std::optional<std::size_t> distance, lighting, depiction, gender, age;
    pick(0, 3, "distance", distance);
    pick(3, 3, "lighting", lighting);
    pick(6, 3, "depiction", depiction);
    pick(9, 3, "gender", gender);
    pick(12, 4, "age", age);
    if (!lighting) throw ParseError(reader.line_number(), "exactly one lighting flag required");
    BenchmarkFlags flags;
    if (distance) flags.distance = static_cast<Distance>(*distance);
    flags.lighting = static_cast<Lighting>(*lighting);
    if (depiction) flags.depiction = static_cast<DepictionClass>(*depiction);
    if (gender) flags.gender = static_cast<Gender>(*gender);
    if (age) flags.age = static_cast<Age>(*age);
    result.flags.push_back(flags);
  }
  return result;
}

void write_decisions_csv(std::ostream& out, std::span<const ImageDecision> decisions) {
  out << "image_id,value,reason,max_positive_area,has_person_depiction,has_nonperson_depiction,"
         "has_group_of\n";
  for (const auto& d : decisions) {
    out << csv::escape(d.image_id) << ',' << to_string(d.label.value) << ','
        << to_string(d.label.reason) << ',' << csv::format_double(d.boxes.max_positive_area)
        << ',' << bit(d.boxes.has_person_depiction) << ',' << bit(d.boxes.has_nonperson_depiction)
        << ',' << bit(d.boxes.has_group_of) << '\n';
  }
}

std::vector<ImageDecision> read_decisions_csv(std::istream& in) {
  csv::Reader reader(in);
  const auto h = csv::read_header(reader);
  const std::size_t c_id = h.require("image_id"), c_value = h.require("value"),
                    c_reason = h.require("reason"), c_area = h.require("max_positive_area"),
                    c_pd = h.require("has_person_depiction"),
                    c_nd = h.require("has_nonperson_depiction"),
                    c_group = h.require("has_group_of");
  std::vector<ImageDecision> out;
  std::string line;
  while (reader.next_line(line)) {
    const auto fields = csv::split_line(line);
    if (!fields || fields->size() < h.size()) {
      throw ParseError(reader.line_number(), "row has fewer fields than the header");
    }
    const auto& f = *fields;
    const auto value = parse_tri_value(csv::trim(f[c_value]));
    const auto reason = parse_reason(csv::trim(f[c_reason]));
    const auto area = csv::parse_double(f[c_area]);
    const auto pd = parse_bit(f[c_pd]);
    const auto nd = parse_bit(f[c_nd]);
    const auto group = parse_bit(f[c_group]);
    if (!value || !reason || !area || !pd || !nd || !group) {
      throw ParseError(reader.line_number(), "malformed decision row");
    }
    ImageDecision d;
    d.image_id = std::string(csv::trim(f[c_id]));
    d.label = {*value, *reason};
    d.boxes.max_positive_area = *area;
    d.boxes.has_person_depiction = *pd;
    d.boxes.has_nonperson_depiction = *nd;
    d.boxes.has_group_of = *group;
    d.boxes.label = d.label;
    out.push_back(std::move(d));
  }
  return out;
}

void write_split_report_text(std::ostream& out, std::string_view name, const SplitReport& r) {
  out << name << '\n'
      << "  inputs           " << r.inputs << '\n'
      << "  positives        " << r.positives << '\n'
      << "  negatives        " << r.negatives << '\n'
      << "  excluded         " << r.excluded << '\n';
  for (const auto& [reason, count] : r.excluded_by_reason) {
    out << "    " << to_string(reason) << ' ' << count << '\n';
  }
  out << "  balance_dropped  " << r.balance_dropped << '\n'
      << "  label_conflicts  " << r.label_conflicts << '\n';
}

void write_split_reports_csv(std::ostream& out,
                             std::span<const std::pair<std::string, SplitReport>> reports) {
  const LabelReason reasons[] = {LabelReason::low_confidence, LabelReason::small_subject_only,
                                 LabelReason::depiction_only, LabelReason::no_annotation,
                                 LabelReason::part_only_disabled};
  out << "split,inputs,positives,negatives,excluded,balance_dropped,label_conflicts";
  for (auto reason : reasons) out << ",excluded_" << to_string(reason);
  out << '\n';
  for (const auto& [name, r] : reports) {
    out << name << ',' << r.inputs << ',' << r.positives << ',' << r.negatives << ','
        << r.excluded << ',' << r.balance_dropped << ',' << r.label_conflicts;
    for (auto reason : reasons) {
      const auto it = r.excluded_by_reason.find(reason);
      out << ',' << (it == r.excluded_by_reason.end() ? 0 : it->second);
    }
    out << '\n';
  }
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train_large: return "train_large";
    case Split::train_quality: return "train_quality";
    case Split::validation: return "validation";
    case Split::test: break;
  }
  return "test";
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::image_level: return "image_level";
    case Provenance::bounding_box: return "bounding_box";
    case Provenance::manual_override: break;
  }
  return "manual_override";
}

}  // namespace wakegen
