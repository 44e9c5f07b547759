#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wakegen/assembly.hpp"
#include "wakegen/bench_flags.hpp"

namespace wakegen {

struct PredictionRecord {
  std::string image_id;
  std::uint8_t predicted = 0;
  std::optional<double> score;
};

// Columns image_id,predicted[,score]. An empty `predicted` cell falls back to
// score >= 0.5.
std::vector<PredictionRecord> parse_predictions(std::istream& in);

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct ConfusionResult {
  ConfusionMatrix matrix;
  std::vector<std::string> missing;  // labeled ids without a prediction, sorted
};

// Throws DomainError on a duplicate prediction or a prediction for an unlabeled id.
ConfusionResult confusion(std::span<const PredictionRecord> preds,
                          const std::unordered_map<std::string, std::uint8_t>& labels);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// Zero-denominator ratios are reported as 0. Throws DomainError on an empty matrix.
Metrics metrics(const ConfusionMatrix& cm);

// How to score a subset whose members all share one class.
enum class SingleClassScoring {
  pool_opposite_class,  // add every opposite-class sample of the split, then compute F1
  accuracy_only,        // score the subset alone and report its accuracy
};

struct SubsetScore {
  std::string name;  // "all" or a subset column name
  std::size_t size = 0;
  std::optional<ConfusionMatrix> matrix;  // absent for an empty subset
  std::optional<Metrics> metrics;
  bool pooled = false;
};

// Row "all" (every labeled sample) followed by the sixteen benchmark subsets. Only
// samples with a prediction are scored; sizes count subset members.
std::vector<SubsetScore> subset_metrics(std::span<const PredictionRecord> preds,
                                        std::span<const DatasetRow> rows,
                                        std::span<const BenchmarkFlags> flags,
                                        SingleClassScoring scoring = SingleClassScoring::pool_opposite_class);

void write_subset_scores_csv(std::ostream& out, std::span<const SubsetScore> scores);
// Aligned text table: family headings, subset titles, a Size row, and an F1 row.
void write_subset_scores_text(std::ostream& out, std::span<const SubsetScore> scores,
                              std::string_view model_name);

struct ModelCard {
  std::string name;
  std::uint64_t macs = 0;
  std::uint64_t flash_bytes = 0;
  std::uint64_t ram_bytes = 0;
  double accuracy = 0.0;

  friend bool operator==(const ModelCard&, const ModelCard&) = default;
};

// Columns name,macs,flash_bytes,ram_bytes,accuracy. macs must be > 0.
std::vector<ModelCard> parse_model_cards(std::istream& in);
void write_model_cards(std::ostream& out, std::span<const ModelCard> cards);

// True when `a` is at least as cheap and at least as accurate as `b`, and strictly
// better in one of the two.
bool dominates(const ModelCard& a, const ModelCard& b);

// Cards no other card dominates, sorted by macs ascending (ties by name).
std::vector<ModelCard> pareto_frontier(std::span<const ModelCard> cards);

}  // namespace wakegen
