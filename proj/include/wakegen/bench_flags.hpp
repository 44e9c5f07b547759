#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace wakegen {

enum class Distance { near, medium, far };
enum class Lighting { dark, normal, bright };
enum class DepictionClass { person_depiction, nonperson_depiction, no_depiction };
enum class Gender { female, male, unknown };
enum class Age { young, middle, older, unknown };

// Membership of one validation/test sample in the fine-grained benchmark families.
// Absent optionals mean the sample is outside that family.
struct BenchmarkFlags {
  std::optional<Distance> distance;
  Lighting lighting = Lighting::normal;
  std::optional<DepictionClass> depiction;
  std::optional<Gender> gender;
  std::optional<Age> age;

  friend bool operator==(const BenchmarkFlags&, const BenchmarkFlags&) = default;
};

// The sixteen benchmark subsets, in output column order.
enum class Subset {
  distance_near,
  distance_medium,
  distance_far,
  lighting_dark,
  lighting_normal,
  lighting_bright,
  depictions_person,
  depictions_nonperson,
  depictions_none,
  gender_female,
  gender_male,
  gender_unknown,
  age_young,
  age_middle,
  age_older,
  age_unknown,
};

inline constexpr std::size_t kSubsetCount = 16;

inline constexpr std::array<Subset, kSubsetCount> kAllSubsets = {
    Subset::distance_near,    Subset::distance_medium,      Subset::distance_far,
    Subset::lighting_dark,    Subset::lighting_normal,      Subset::lighting_bright,
    Subset::depictions_person, Subset::depictions_nonperson, Subset::depictions_none,
    Subset::gender_female,    Subset::gender_male,          Subset::gender_unknown,
    Subset::age_young,        Subset::age_middle,           Subset::age_older,
    Subset::age_unknown,
};

// CSV column name, e.g. "distance_near".
std::string_view subset_name(Subset s);
// Family heading ("Distance") and member heading ("Near") for tabular reports.
std::string_view subset_family(Subset s);
std::string_view subset_member_title(Subset s);

bool in_subset(const BenchmarkFlags& flags, Subset s);

}  // namespace wakegen
