#include "wakegen/bench_synth.hpp"

#include <iomanip>

#include "wakegen/csv.hpp"
#include "wakegen/error.hpp"

namespace wakegen {

std::string_view subset_name(Subset s) {
  switch (s) {
    case Subset::distance_near: return "distance_near";
    case Subset::distance_medium: return "distance_medium";
    case Subset::distance_far: return "distance_far";
    case Subset::lighting_dark: return "lighting_dark";
    case Subset::lighting_normal: return "lighting_normal";
    case Subset::lighting_bright: return "lighting_bright";
    case Subset::depictions_person: return "depictions_person";
    case Subset::depictions_nonperson: return "depictions_nonperson";
    case Subset::depictions_none: return "depictions_none";
    case Subset::gender_female: return "gender_female";
    case Subset::gender_male: return "gender_male";
    case Subset::gender_unknown: return "gender_unknown";
    case Subset::age_young: return "age_young";
    case Subset::age_middle: return "age_middle";
    case Subset::age_older: return "age_older";
    case Subset::age_unknown: break;
  }
  return "age_unknown";
}

std::string_view subset_family(Subset s) {
  switch (s) {
    case Subset::distance_near:
    case Subset::distance_medium:
    case Subset::distance_far: return "Distance";
    case Subset::lighting_dark:
    case Subset::lighting_normal:
    case Subset::lighting_bright: return "Lighting";
    case Subset::depictions_person:
    case Subset::depictions_nonperson:
    case Subset::depictions_none: return "Depictions";
    case Subset::gender_female:
    case Subset::gender_male:
    case Subset::gender_unknown: return "Gender";
    default: break;
  }
  return "Age";
}

std::string_view subset_member_title(Subset s) {
  switch (s) {
    case Subset::distance_near: return "Near";
    case Subset::distance_medium: return "Medium";
    case Subset::distance_far: return "Far";
    case Subset::lighting_dark: return "Dark";
    case Subset::lighting_normal: return "Normal";
    case Subset::lighting_bright: return "Bright";
    case Subset::depictions_person: return "Person";
    case Subset::depictions_nonperson: return "Non-Person";
    case Subset::depictions_none: return "No Depiction";
    case Subset::gender_female: return "Female";
    case Subset::gender_male: return "Male";
    case Subset::age_young: return "Young";
    case Subset::age_middle: return "Middle";
    case Subset::age_older: return "Older";
    default: break;
  }
  return "Unknown";
}

bool in_subset(const BenchmarkFlags& f, Subset s) {
  switch (s) {
    case Subset::distance_near: return f.distance == Distance::near;
    case Subset::distance_medium: return f.distance == Distance::medium;
    case Subset::distance_far: return f.distance == Distance::far;
    case Subset::lighting_dark: return f.lighting == Lighting::dark;
    case Subset::lighting_normal: return f.lighting == Lighting::normal;
    case Subset::lighting_bright: return f.lighting == Lighting::bright;
    case Subset::depictions_person: return f.depiction == DepictionClass::person_depiction;
    case Subset::depictions_nonperson: return f.depiction == DepictionClass::nonperson_depiction;
    case Subset::depictions_none: return f.depiction == DepictionClass::no_depiction;
    case Subset::gender_female: return f.gender == Gender::female;
    case Subset::gender_male: return f.gender == Gender::male;
    case Subset::gender_unknown: return f.gender == Gender::unknown;
    case Subset::age_young: return f.age == Age::young;
    case Subset::age_middle: return f.age == Age::middle;
    case Subset::age_older: return f.age == Age::older;
    case Subset::age_unknown: return f.age == Age::unknown;
  }
  return false;
}

LuminanceStat mean_grayscale(RgbImageView image, const LumaWeights& weights) {
  const std::size_t n = image.width * image.height;
  if (n == 0) throw DomainError("mean_grayscale: zero-size image");
  if (image.pixels.size() != n * 3) throw DomainError("mean_grayscale: pixel buffer size mismatch");
  // Channel sums are exact in 64-bit integers; the weighting is linear, so applying it to
  // channel means equals averaging per-pixel gray values.
  std::uint64_t sum[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    sum[0] += image.pixels[3 * i];
    sum[1] += image.pixels[3 * i + 1];
    sum[2] += image.pixels[3 * i + 2];
  }
  const double count = static_cast<double>(n);
  return {weights.r * (static_cast<double>(sum[0]) / count) +
          weights.g * (static_cast<double>(sum[1]) / count) +
          weights.b * (static_cast<double>(sum[2]) / count)};
}

Lighting lighting_flag(LuminanceStat stat) {
  if (stat.mean_gray < 85.0) return Lighting::dark;
  if (stat.mean_gray > 170.0) return Lighting::bright;
  return Lighting::normal;
}

std::optional<Distance> distance_flag(double max_positive_area) {
  if (!(max_positive_area > 0.0)) return std::nullopt;
  if (max_positive_area > 0.60) return Distance::near;
  if (max_positive_area < 0.10) return Distance::far;
  return Distance::medium;
}

DepictionClass depiction_flag(const BoxDecision& decision) {
  if (decision.has_person_depiction) return DepictionClass::person_depiction;
  if (decision.has_nonperson_depiction) return DepictionClass::nonperson_depiction;
  return DepictionClass::no_depiction;
}

DemographicFlags demographic_flags(std::span<const MiapAnnotation> rows) {
  DemographicFlags out;
  if (rows.empty()) return out;
  const auto first_gender = rows.front().gender_presentation;
  const auto first_age = rows.front().age_presentation;
  bool gender_agrees = first_gender != GenderPresentation::unknown;
  bool age_agrees = first_age != AgePresentation::unknown;
  for (const auto& r : rows) {
    gender_agrees = gender_agrees && r.gender_presentation == first_gender;
    age_agrees = age_agrees && r.age_presentation == first_age;
  }
  out.gender = !gender_agrees                                  ? Gender::unknown
               : first_gender == GenderPresentation::feminine ? Gender::female
                                                              : Gender::male;
  if (!age_agrees) {
    out.age = Age::unknown;
  } else {
    switch (first_age) {
      case AgePresentation::young: out.age = Age::young; break;
      case AgePresentation::middle: out.age = Age::middle; break;
      case AgePresentation::older: out.age = Age::older; break;
      case AgePresentation::unknown: out.age = Age::unknown; break;
    }
  }
  return out;
}

SynthesisResult synthesize(std::span<const DatasetRow> rows,
                           const std::unordered_map<std::string, BoxDecision>& decisions,
                           const std::unordered_map<std::string, std::vector<MiapAnnotation>>& miap,
                           const std::unordered_map<std::string, LuminanceStat>& luminance) {
  SynthesisResult result;
  result.flags.reserve(rows.size());
  for (const auto& row : rows) {
    const auto lum = luminance.find(row.image_id);
    if (lum == luminance.end()) {
      throw ConfigError("no luminance value for image " + row.image_id);
    }
    BenchmarkFlags flags;
    flags.lighting = lighting_flag(lum->second);
    const auto decision = decisions.find(row.image_id);
    if (row.label == 1) {
      if (row.provenance != Provenance::image_level && decision != decisions.end()) {
        flags.distance = distance_flag(decision->second.max_positive_area);
      }
      if (const auto m = miap.find(row.image_id); m != miap.end() && !m->second.empty()) {
        const auto demo = demographic_flags(m->second);
        flags.gender = demo.gender;
        flags.age = demo.age;
      }
    } else if (decision != decisions.end()) {
      flags.depiction = depiction_flag(decision->second);
    } else {
      BoxDecision from_row;
      from_row.has_person_depiction = row.depiction_person;
      from_row.has_nonperson_depiction = row.depiction_nonperson;
      flags.depiction = depiction_flag(from_row);
    }
    result.flags.push_back(flags);
  }
  result.counts = count_subsets(result.flags);
  return result;
}

SubsetCounts count_subsets(std::span<const BenchmarkFlags> flags) {
  SubsetCounts counts{};
  for (const auto& f : flags) {
    for (std::size_t k = 0; k < kSubsetCount; ++k) {
      if (in_subset(f, kAllSubsets[k])) ++counts[k];
    }
  }
  return counts;
}

std::unordered_map<std::string, LuminanceStat> parse_luminance_csv(std::istream& in) {
  csv::Reader reader(in);
  const auto h = csv::read_header(reader);
  const auto c_id = h.require("image_id");
  const auto c_mean = h.require("mean_gray");
  std::unordered_map<std::string, LuminanceStat> out;
  std::string line;
  while (reader.next_line(line)) {
    const auto f = csv::split_line(line);
    if (!f || f->size() <= std::max(c_id, c_mean)) {
      throw ParseError(reader.line_number(), "expected image_id,mean_gray");
    }
    const auto mean = csv::parse_double((*f)[c_mean]);
    if (!mean || *mean < 0.0 || *mean > 255.0) {
      throw ParseError(reader.line_number(), "mean_gray must be a number in [0,255]");
    }
    out[std::string(csv::trim((*f)[c_id]))] = LuminanceStat{*mean};
  }
  return out;
}

void write_luminance_csv(std::ostream& out, const std::map<std::string, LuminanceStat>& stats) {
  out << "image_id,mean_gray\n";
  for (const auto& [id, stat] : stats) {
    out << csv::escape(id) << ',' << csv::format_double(stat.mean_gray) << '\n';
  }
}

void write_subset_sizes_text(std::ostream& out,
                             std::span<const std::pair<std::string, SubsetCounts>> splits) {
  constexpr int kLabelWidth = 12;
  constexpr int kColWidth = 13;
  out << std::left << std::setw(kLabelWidth) << "";
  std::string_view family;
  for (Subset s : kAllSubsets) {
    const auto f = subset_family(s);
    out << std::setw(kColWidth) << (f == family ? std::string_view{} : f);
    family = f;
  }
  out << '\n' << std::setw(kLabelWidth) << "Size";
  for (Subset s : kAllSubsets) out << std::setw(kColWidth) << subset_member_title(s);
  out << '\n';
  for (const auto& [name, counts] : splits) {
    out << std::setw(kLabelWidth) << name;
    for (auto c : counts) out << std::setw(kColWidth) << c;
    out << '\n';
  }
  out << std::right;
}

void write_subset_sizes_csv(std::ostream& out,
                            std::span<const std::pair<std::string, SubsetCounts>> splits) {
  out << "split";
  for (Subset s : kAllSubsets) out << ',' << subset_name(s);
  out << '\n';
  for (const auto& [name, counts] : splits) {
    out << name;
    for (auto c : counts) out << ',' << c;
    out << '\n';
  }
}

std::string_view to_string(Lighting l) {
  switch (l) {
    case Lighting::dark: return "dark";
    case Lighting::normal: return "normal";
    case Lighting::bright: break;
  }
  return "bright";
}

std::string_view to_string(Distance d) {
  switch (d) {
    case Distance::near: return "near";
    case Distance::medium: return "medium";
    case Distance::far: break;
  }
  return "far";
}

}  // namespace wakegen
