#include "wakegen/quality_lab.hpp"

#include <algorithm>
#include <cmath>

#include "wakegen/csv.hpp"
#include "wakegen/error.hpp"
#include "wakegen/rng.hpp"

namespace wakegen {

namespace {

std::uint8_t require_bit(std::string_view s, std::size_t line, const char* column) {
  s = csv::trim(s);
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ParseError(line, std::string(column) + " must be 0 or 1");
}

}  // namespace

double flip_probability(double e, double d) {
  if (!(e >= 0.0 && e < 1.0)) throw DomainError("base error rate must lie in [0,1)");
  if (!(d >= 0.0 && d <= 1.0)) throw DomainError("target error rate must lie in [0,1]");
  const double denom = 2.0 * e - 1.0;
  if (std::abs(denom) < 1e-12) throw DomainError("base error rate 0.5 makes the flip rate undefined");
  const double p = (e - d) / denom;
  // Absorb rounding at the ends of the range.
  if (p < 0.0 && p > -1e-12) return 0.0;
  if (p > 1.0 && p < 1.0 + 1e-12) return 1.0;
  if (p < 0.0 || p > 1.0) {
    throw DomainError("target error rate " + csv::format_double(d) +
                      " is unreachable from base rate " + csv::format_double(e) +
                      " (flip probability " + csv::format_double(p) + ")");
  }
  return p;
}

std::vector<std::uint8_t> inject_noise(std::span<const std::uint8_t> labels, const NoiseSpec& spec) {
  const double p = flip_probability(spec.base_error_rate, spec.target_error_rate);
  SeededRng rng(spec.seed);
  std::vector<std::uint8_t> out(labels.begin(), labels.end());
  for (auto& label : out) {
    if (rng.uniform01() < p) label = label ? 0 : 1;
  }
  return out;
}

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) throw DomainError("Wilson interval needs at least one trial");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  double lo = std::max(0.0, center - half);
  double hi = std::min(1.0, center + half);
  if (k == 0) lo = 0.0;
  if (k == n) hi = 1.0;
  return {std::min(lo, p), std::max(hi, p)};
}

AuditResult estimate_error_rate(std::span<const AuditSample> audit) {
  if (audit.empty()) throw DomainError("cannot estimate an error rate from an empty audit");
  AuditResult r;
  r.sample_size = audit.size();
  r.errors_found = static_cast<std::size_t>(std::count_if(
      audit.begin(), audit.end(), [](const AuditSample& s) { return s.given != s.truth; }));
  r.point_estimate = static_cast<double>(r.errors_found) / static_cast<double>(r.sample_size);
  std::tie(r.lower, r.upper) = wilson_interval(r.errors_found, r.sample_size);
  return r;
}

std::vector<AuditSample> parse_audit_csv(std::istream& in) {
  csv::Reader reader(in);
  const auto h = csv::read_header(reader);
  const auto c_id = h.require("image_id");
  const auto c_given = h.require("given");
  const auto c_truth = h.require("truth");
  std::vector<AuditSample> out;
  std::string line;
  while (reader.next_line(line)) {
    const auto f = csv::split_line(line);
    if (!f || f->size() < h.size()) throw ParseError(reader.line_number(), "expected image_id,given,truth");
    out.push_back({std::string(csv::trim((*f)[c_id])),
                   require_bit((*f)[c_given], reader.line_number(), "given"),
                   require_bit((*f)[c_truth], reader.line_number(), "truth")});
  }
  return out;
}

void write_audit_result(std::ostream& out, const AuditResult& r) {
  out << "sample_size,errors_found,point_estimate,lower_95,upper_95\n"
      << r.sample_size << ',' << r.errors_found << ',' << csv::format_double(r.point_estimate)
      << ',' << csv::format_double(r.lower) << ',' << csv::format_double(r.upper) << '\n';
}

std::vector<IssueFlag> flag_label_issues(std::span<const std::string> image_ids,
                                         std::span<const ClassProbabilities> probs,
                                         std::span<const std::uint8_t> labels) {
  if (probs.size() != labels.size() || image_ids.size() != labels.size()) {
    throw DomainError("image ids, probabilities and labels must have equal length");
  }
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto& p = probs[i];
    if (std::abs(p.p_negative + p.p_positive - 1.0) > 1e-6 || p.p_negative < 0.0 ||
        p.p_positive < 0.0) {
      throw DomainError("probabilities for " + image_ids[i] + " do not form a distribution");
    }
    const int c = labels[i] ? 1 : 0;
    sum[c] += c ? p.p_positive : p.p_negative;
    ++count[c];
  }
  for (int c = 0; c < 2; ++c) {
    if (count[c] == 0) {
      throw DomainError(std::string("no samples labeled ") + (c ? "positive" : "negative") +
                        "; class threshold undefined");
    }
  }
  const double threshold[2] = {sum[0] / static_cast<double>(count[0]),
                               sum[1] / static_cast<double>(count[1])};

  std::vector<IssueFlag> flags;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const int given = labels[i] ? 1 : 0;
    const int other = 1 - given;
    const double p_given = given ? probs[i].p_positive : probs[i].p_negative;
    const double p_other = other ? probs[i].p_positive : probs[i].p_negative;
    if (p_other >= threshold[other] && p_other > p_given) {
      flags.push_back({image_ids[i], static_cast<std::uint8_t>(given),
                       static_cast<std::uint8_t>(other), p_other - threshold[other]});
    }
  }
  return flags;
}

std::vector<ScoredSample> parse_scored_csv(std::istream& in) {
  csv::Reader reader(in);
  const auto h = csv::read_header(reader);
  const auto c_id = h.require("image_id");
  const auto c_label = h.require("label");
  const auto c_neg = h.require("p_negative");
  const auto c_pos = h.require("p_positive");
  std::vector<ScoredSample> out;
  std::string line;
  while (reader.next_line(line)) {
    const auto f = csv::split_line(line);
    if (!f || f->size() < h.size()) throw ParseError(reader.line_number(), "short row");
    const auto pn = csv::parse_double((*f)[c_neg]);
    const auto pp = csv::parse_double((*f)[c_pos]);
    if (!pn || !pp) throw ParseError(reader.line_number(), "non-numeric probability");
    out.push_back({std::string(csv::trim((*f)[c_id])),
                   require_bit((*f)[c_label], reader.line_number(), "label"), {*pn, *pp}});
  }
  return out;
}

void write_issue_flags_csv(std::ostream& out, std::span<const IssueFlag> flags) {
  out << "image_id,given,suggested,margin\n";
  for (const auto& f : flags) {
    out << csv::escape(f.image_id) << ',' << int(f.given_label) << ',' << int(f.suggested_label)
        << ',' << csv::format_double(f.margin) << '\n';
  }
}

}  // namespace wakegen
