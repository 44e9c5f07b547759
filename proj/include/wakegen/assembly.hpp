#pragma once

// Split assembly: labels grouped image records with one of the two labelers,
// balances classes by seeded downsampling, applies manual overrides, and
// reads/writes the label CSVs.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wakegen/bbox_filter.hpp"
#include "wakegen/bench_flags.hpp"
#include "wakegen/label_fusion.hpp"
#include "wakegen/oi_ingest.hpp"
#include "wakegen/rng.hpp"

namespace wakegen {

enum class Split { train_large, train_quality, validation, test };
enum class Labeler { image_level, bounding_box };
enum class Provenance { image_level, bounding_box, manual_override };

struct ImageRecord {
  std::string image_id;
  std::vector<ImageLevelLabel> labels;
  std::vector<BoxAnnotation> boxes;
};

// Groups annotations per image, sorted by image id. The universe is every image
// that occurs in either input.
std::vector<ImageRecord> group_by_image(std::vector<ImageLevelLabel> labels,
                                        std::vector<BoxAnnotation> boxes);

struct DatasetRow {
  std::string image_id;
  std::string file_name;
  std::uint8_t label = 0;
  Split split = Split::train_large;
  bool depiction_person = false;
  bool depiction_nonperson = false;
  Provenance provenance = Provenance::image_level;

  friend bool operator==(const DatasetRow&, const DatasetRow&) = default;
};

std::string file_name_for(std::string_view image_id);
std::string image_id_from_file_name(std::string_view file_name);

// Labeling outcome for one input image, kept for every image including excluded ones.
struct ImageDecision {
  std::string image_id;
  TriLabel label;
  BoxDecision boxes;  // computed from the image's boxes whichever labeler ran
};

struct SplitReport {
  std::size_t inputs = 0;
  std::size_t positives = 0;  // after balancing
  std::size_t negatives = 0;  // after balancing
  std::size_t excluded = 0;
  std::size_t balance_dropped = 0;
  std::size_t label_conflicts = 0;  // positive images that also carry a verified absence
  std::map<LabelReason, std::size_t> excluded_by_reason;

  friend bool operator==(const SplitReport&, const SplitReport&) = default;
};

struct SplitResult {
  std::vector<DatasetRow> rows;  // sorted by image id
  SplitReport report;
  std::vector<ImageDecision> decisions;  // same order as the input records
};

// Labels each record (in parallel), drops excluded images, and balances the classes.
// Validation and test splits require the bounding-box labeler.
SplitResult build_split(std::span<const ImageRecord> records, Labeler labeler, Split split,
                        const ClassSet& cs, const TaskSpec& spec, std::uint64_t seed,
                        unsigned workers = 1);

// Downsamples the larger side to the smaller side's size with a seeded draw without
// replacement. Both outputs are sorted by key. The result depends only on the input
// sets and the seed, not on input order.
template <class T, class KeyFn>
std::pair<std::vector<T>, std::vector<T>> balance(std::vector<T> pos, std::vector<T> neg,
                                                  std::uint64_t seed, KeyFn key) {
  const auto by_key = [&](const T& a, const T& b) { return key(a) < key(b); };
  std::stable_sort(pos.begin(), pos.end(), by_key);
  std::stable_sort(neg.begin(), neg.end(), by_key);
  const std::size_t keep = std::min(pos.size(), neg.size());
  auto& larger = pos.size() > neg.size() ? pos : neg;
  if (larger.size() > keep) {
    SeededRng rng(seed);
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(larger.size() - i));
      std::swap(larger[i], larger[j]);
    }
    larger.resize(keep);
    std::stable_sort(larger.begin(), larger.end(), by_key);
  }
  return {std::move(pos), std::move(neg)};
}

std::pair<std::vector<DatasetRow>, std::vector<DatasetRow>> balance(std::vector<DatasetRow> pos,
                                                                    std::vector<DatasetRow> neg,
                                                                    std::uint64_t seed);

struct LabelOverride {
  std::string image_id;
  std::uint8_t label = 0;
};

// Columns image_id,label.
std::vector<LabelOverride> parse_overrides(std::istream& in);

// Replaces labels and marks the rows manual_override. Returns how many labels changed.
// Throws UnknownLabelError listing every override id absent from `rows`; rows are left
// untouched in that case.
std::size_t apply_overrides(std::vector<DatasetRow>& rows, std::span<const LabelOverride> overrides);

// Validation/test image ids must not appear in any other split.
void check_split_hygiene(std::span<const DatasetRow> rows);

// file_name,<label>,depiction_<label>,depiction_non<label>
void write_labels_csv(std::ostream& out, std::span<const DatasetRow> rows,
                      std::string_view label_name);
// Same columns followed by one 0/1 column per benchmark subset. `flags` parallels `rows`.
void write_labels_csv(std::ostream& out, std::span<const DatasetRow> rows,
                      std::span<const BenchmarkFlags> flags, std::string_view label_name);

struct LabelCsv {
  std::vector<DatasetRow> rows;
  std::vector<BenchmarkFlags> flags;  // empty unless the file has benchmark columns
};

// Reads a file written by write_labels_csv. Rows get `split`, and provenance
// bounding_box for evaluation splits or image_level otherwise.
LabelCsv read_labels_csv(std::istream& in, std::string_view label_name, Split split);

void write_decisions_csv(std::ostream& out, std::span<const ImageDecision> decisions);
// The box-level label is not stored; it is read back as the image label.
std::vector<ImageDecision> read_decisions_csv(std::istream& in);

void write_split_report_text(std::ostream& out, std::string_view name, const SplitReport& report);
void write_split_reports_csv(std::ostream& out,
                             std::span<const std::pair<std::string, SplitReport>> reports);

std::string_view to_string(Split s);
std::string_view to_string(Provenance p);

}  // namespace wakegen
