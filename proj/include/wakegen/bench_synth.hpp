#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wakegen/assembly.hpp"
#include "wakegen/bbox_filter.hpp"
#include "wakegen/bench_flags.hpp"
#include "wakegen/oi_ingest.hpp"

namespace wakegen {

struct LuminanceStat {
  double mean_gray = 0.0;  // 0..255
};

// Defaults are the ITU-R BT.601 luma weights.
struct LumaWeights {
  double r = 0.299;
  double g = 0.587;
  double b = 0.114;
};

// Interleaved 8-bit RGB, row-major.
struct RgbImageView {
  std::size_t width = 0;
  std::size_t height = 0;
  std::span<const std::uint8_t> pixels;
};

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImageView view() const { return {width, height, pixels}; }
};

// Binary PPM (P6, maxval <= 255).
RgbImage read_ppm(std::istream& in);
void write_ppm(std::ostream& out, RgbImageView image);
RgbImage read_png(const std::filesystem::path& path);
// Dispatches on the file signature: P6 or PNG.
RgbImage load_image(const std::filesystem::path& path);

// Mean of per-pixel weighted gray values. Throws DomainError for an empty image.
LuminanceStat mean_grayscale(RgbImageView image, const LumaWeights& weights = {});

// dark < 85 <= normal <= 170 < bright
Lighting lighting_flag(LuminanceStat stat);

// far < 0.10 <= medium <= 0.60 < near; nullopt for a non-positive area.
std::optional<Distance> distance_flag(double max_positive_area);

DepictionClass depiction_flag(const BoxDecision& decision);

struct DemographicFlags {
  std::optional<Gender> gender;
  std::optional<Age> age;
};

// Consensus over all MIAP boxes of one image: a shared known value wins, any
// disagreement or unknown yields unknown, no rows yields absent.
DemographicFlags demographic_flags(std::span<const MiapAnnotation> rows);

using SubsetCounts = std::array<std::size_t, kSubsetCount>;

struct SynthesisResult {
  std::vector<BenchmarkFlags> flags;  // parallel to the input rows
  SubsetCounts counts{};
};

// Attaches benchmark flags to validation/test rows. Distance needs a positive row with
// box provenance (or a manual override of one) and a recorded box area; depiction is
// set for negatives only; demographics for positives with MIAP rows. Every row needs a
// luminance entry.
SynthesisResult synthesize(std::span<const DatasetRow> rows,
                           const std::unordered_map<std::string, BoxDecision>& decisions,
                           const std::unordered_map<std::string, std::vector<MiapAnnotation>>& miap,
                           const std::unordered_map<std::string, LuminanceStat>& luminance);

SubsetCounts count_subsets(std::span<const BenchmarkFlags> flags);

// image_id,mean_gray
std::unordered_map<std::string, LuminanceStat> parse_luminance_csv(std::istream& in);
void write_luminance_csv(std::ostream& out, const std::map<std::string, LuminanceStat>& stats);

// Family/member header rows and one size row per split.
void write_subset_sizes_text(std::ostream& out,
                             std::span<const std::pair<std::string, SubsetCounts>> splits);
void write_subset_sizes_csv(std::ostream& out,
                            std::span<const std::pair<std::string, SubsetCounts>> splits);

std::string_view to_string(Lighting l);
std::string_view to_string(Distance d);

}  // namespace wakegen
