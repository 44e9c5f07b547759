#include "wakegen/eval_harness.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <sstream>

#include "wakegen/csv.hpp"
#include "wakegen/error.hpp"

namespace wakegen {

namespace {

void tally(ConfusionMatrix& cm, std::uint8_t predicted, std::uint8_t truth) {
  if (predicted && truth) {
    ++cm.tp;
  } else if (predicted) {
    ++cm.fp;
  } else if (truth) {
    ++cm.fn;
  } else {
    ++cm.tn;
  }
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::unordered_map<std::string, std::uint8_t> prediction_index(
    std::span<const PredictionRecord> preds) {
  std::unordered_map<std::string, std::uint8_t> index;
  index.reserve(preds.size());
  for (const auto& p : preds) {
    if (!index.emplace(p.image_id, p.predicted).second) {
      throw DomainError("duplicate prediction for image " + p.image_id);
    }
  }
  return index;
}

}  // namespace

std::vector<PredictionRecord> parse_predictions(std::istream& in) {
  csv::Reader reader(in);
  const auto h = csv::read_header(reader);
  const auto c_id = h.require("image_id");
  const auto c_pred = h.require("predicted");
  const auto c_score = h.find("score");
  std::vector<PredictionRecord> out;
  std::string line;
  while (reader.next_line(line)) {
    const auto f = csv::split_line(line);
    if (!f || f->size() <= std::max(c_id, c_pred)) {
      throw ParseError(reader.line_number(), "expected image_id,predicted[,score]");
    }
    PredictionRecord rec;
    rec.image_id = std::string(csv::trim((*f)[c_id]));
    if (c_score && *c_score < f->size() && !csv::trim((*f)[*c_score]).empty()) {
      const auto s = csv::parse_double((*f)[*c_score]);
      if (!s || *s < 0.0 || *s > 1.0) throw ParseError(reader.line_number(), "score must lie in [0,1]");
      rec.score = *s;
    }
    const auto pred = csv::trim((*f)[c_pred]);
    if (pred == "0" || pred == "1") {
      rec.predicted = pred == "1" ? 1 : 0;
    } else if (pred.empty() && rec.score) {
      rec.predicted = *rec.score >= 0.5 ? 1 : 0;
    } else {
      throw ParseError(reader.line_number(), "predicted must be 0 or 1 (or empty with a score)");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

ConfusionResult confusion(std::span<const PredictionRecord> preds,
                          const std::unordered_map<std::string, std::uint8_t>& labels) {
  const auto index = prediction_index(preds);
  ConfusionResult result;
  for (const auto& p : preds) {
    const auto it = labels.find(p.image_id);
    if (it == labels.end()) throw DomainError("prediction for unlabeled image " + p.image_id);
    tally(result.matrix, p.predicted, it->second);
  }
  for (const auto& [id, _] : labels) {
    if (!index.count(id)) result.missing.push_back(id);
  }
  std::sort(result.missing.begin(), result.missing.end());
  return result;
}

Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DomainError("metrics of an empty confusion matrix");
  Metrics m;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  m.recall = ratio(cm.tp, cm.tp + cm.fn);
  m.f1 = m.precision + m.recall == 0.0 ? 0.0
                                       : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

std::vector<SubsetScore> subset_metrics(std::span<const PredictionRecord> preds,
                                        std::span<const DatasetRow> rows,
                                        std::span<const BenchmarkFlags> flags,
                                        SingleClassScoring scoring) {
  if (flags.size() != rows.size()) throw DomainError("benchmark flags do not parallel rows");
  const auto index = prediction_index(preds);
  {
    std::unordered_map<std::string, std::uint8_t> labels;
    for (const auto& r : rows) labels.emplace(r.image_id, r.label);
    for (const auto& p : preds) {
      if (!labels.count(p.image_id)) throw DomainError("prediction for unlabeled image " + p.image_id);
    }
  }
  std::vector<std::optional<std::uint8_t>> predicted(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (const auto it = index.find(rows[i].image_id); it != index.end()) predicted[i] = it->second;
  }

  std::vector<SubsetScore> scores;
  {
    SubsetScore all{"all", rows.size(), std::nullopt, std::nullopt, false};
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (predicted[i]) tally(cm, *predicted[i], rows[i].label);
    }
    if (cm.total()) {
      all.matrix = cm;
      all.metrics = metrics(cm);
    }
    scores.push_back(std::move(all));
  }

  for (Subset s : kAllSubsets) {
    SubsetScore score{std::string(subset_name(s)), 0, std::nullopt, std::nullopt, false};
    ConfusionMatrix cm;
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!in_subset(flags[i], s)) continue;
      ++score.size;
      if (!predicted[i]) continue;
      tally(cm, *predicted[i], rows[i].label);
      (rows[i].label ? has_pos : has_neg) = true;
    }
    if (cm.total() != 0) {
      if (has_pos != has_neg && scoring == SingleClassScoring::pool_opposite_class) {
        // F1 is undefined on one class; pool with the split's opposite class.
        const std::uint8_t opposite = has_pos ? 0 : 1;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (rows[i].label == opposite && predicted[i]) tally(cm, *predicted[i], rows[i].label);
        }
        score.pooled = true;
      }
      score.matrix = cm;
      score.metrics = metrics(cm);
    }
    scores.push_back(std::move(score));
  }
  return scores;
}

void write_subset_scores_csv(std::ostream& out, std::span<const SubsetScore> scores) {
  out << "subset,size,tp,fp,tn,fn,accuracy,precision,recall,f1,pooled\n";
  for (const auto& s : scores) {
    out << s.name << ',' << s.size;
    if (s.matrix && s.metrics) {
      out << ',' << s.matrix->tp << ',' << s.matrix->fp << ',' << s.matrix->tn << ','
          << s.matrix->fn << ',' << csv::format_double(s.metrics->accuracy) << ','
          << csv::format_double(s.metrics->precision) << ','
          << csv::format_double(s.metrics->recall) << ',' << csv::format_double(s.metrics->f1);
    } else {
      out << ",,,,,,,,";
    }
    out << ',' << (s.pooled ? 1 : 0) << '\n';
  }
}

void write_subset_scores_text(std::ostream& out, std::span<const SubsetScore> scores,
                              std::string_view model_name) {
  constexpr int kLabelWidth = 14;
  constexpr int kColWidth = 13;
  const auto fmt = [](const SubsetScore& s) -> std::string {
    if (!s.metrics) return "-";
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(4);
    // Unpooled single-class subsets have no meaningful F1; show accuracy marked "a".
    const bool single_class = s.matrix && ((s.matrix->tp + s.matrix->fn == 0) ||
                                           (s.matrix->tn + s.matrix->fp == 0));
    if (single_class && !s.pooled && s.name != "all") {
      ss << s.metrics->accuracy << 'a';
    } else {
      ss << s.metrics->f1;
    }
    return ss.str();
  };

  const SubsetScore* all = nullptr;
  std::vector<const SubsetScore*> by_subset(kSubsetCount, nullptr);
  for (const auto& s : scores) {
    if (s.name == "all") all = &s;
    for (std::size_t k = 0; k < kSubsetCount; ++k) {
      if (s.name == subset_name(kAllSubsets[k])) by_subset[k] = &s;
    }
  }

  out << std::left << std::setw(kLabelWidth) << "" << std::setw(kColWidth) << "Overall";
  std::string_view family;
  for (Subset s : kAllSubsets) {
    const auto f = subset_family(s);
    out << std::setw(kColWidth) << (f == family ? std::string_view{} : f);
    family = f;
  }
  out << '\n' << std::setw(kLabelWidth) << "" << std::setw(kColWidth) << "All";
  for (Subset s : kAllSubsets) out << std::setw(kColWidth) << subset_member_title(s);
  out << '\n' << std::setw(kLabelWidth) << "Size" << std::setw(kColWidth)
      << (all ? std::to_string(all->size) : "-");
  for (const auto* s : by_subset) out << std::setw(kColWidth) << (s ? std::to_string(s->size) : "-");
  out << '\n' << std::setw(kLabelWidth) << model_name << std::setw(kColWidth) << (all ? fmt(*all) : "-");
  for (const auto* s : by_subset) out << std::setw(kColWidth) << (s ? fmt(*s) : "-");
  out << '\n' << std::right;
}

std::vector<ModelCard> parse_model_cards(std::istream& in) {
  csv::Reader reader(in);
  const auto h = csv::read_header(reader);
  const std::size_t c_name = h.require("name"), c_macs = h.require("macs"),
                    c_flash = h.require("flash_bytes"), c_ram = h.require("ram_bytes"),
                    c_acc = h.require("accuracy");
  std::vector<ModelCard> out;
  std::string line;
  while (reader.next_line(line)) {
    const auto f = csv::split_line(line);
    if (!f || f->size() < h.size()) throw ParseError(reader.line_number(), "short model-card row");
    const auto macs = csv::parse_uint((*f)[c_macs]);
    const auto flash = csv::parse_uint((*f)[c_flash]);
    const auto ram = csv::parse_uint((*f)[c_ram]);
    const auto acc = csv::parse_double((*f)[c_acc]);
    if (!macs || *macs == 0) throw ParseError(reader.line_number(), "macs must be a positive integer");
    if (!flash || !ram) throw ParseError(reader.line_number(), "flash_bytes/ram_bytes must be integers");
    if (!acc || *acc < 0.0 || *acc > 1.0) throw ParseError(reader.line_number(), "accuracy must lie in [0,1]");
    out.push_back({std::string(csv::trim((*f)[c_name])), *macs, *flash, *ram, *acc});
  }
  return out;
}

void write_model_cards(std::ostream& out, std::span<const ModelCard> cards) {
  out << "name,macs,flash_bytes,ram_bytes,accuracy\n";
  for (const auto& c : cards) {
    out << csv::escape(c.name) << ',' << c.macs << ',' << c.flash_bytes << ',' << c.ram_bytes
        << ',' << csv::format_double(c.accuracy) << '\n';
  }
}

bool dominates(const ModelCard& a, const ModelCard& b) {
  return a.macs <= b.macs && a.accuracy >= b.accuracy &&
         (a.macs < b.macs || a.accuracy > b.accuracy);
}

std::vector<ModelCard> pareto_frontier(std::span<const ModelCard> cards) {
  std::vector<ModelCard> sorted(cards.begin(), cards.end());
  std::sort(sorted.begin(), sorted.end(), [](const ModelCard& a, const ModelCard& b) {
    if (a.macs != b.macs) return a.macs < b.macs;
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.name < b.name;
  });
  std::vector<ModelCard> frontier;
  double best = -std::numeric_limits<double>::infinity();
  for (auto& card : sorted) {
    // Cheaper cards were seen first, so a card survives only by beating their accuracy,
    // or by exactly duplicating the last survivor.
    const bool duplicate = !frontier.empty() && card.macs == frontier.back().macs &&
                           card.accuracy == frontier.back().accuracy;
    if (card.accuracy > best || duplicate) {
      best = std::max(best, card.accuracy);
      frontier.push_back(std::move(card));
    }
  }
  return frontier;
}

}  // namespace wakegen
