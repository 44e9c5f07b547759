#pragma once

// Label-quality instruments: label-noise injection at an exact expected error rate,
// audited error-rate estimation, and thresholded confident-learning issue flagging.

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace wakegen {

struct NoiseSpec {
  double base_error_rate = 0.0;    // error rate already present in the labels
  double target_error_rate = 0.0;  // desired expected error rate after flipping
  std::uint64_t seed = 0;
};

// Probability of flipping each label so that a set with error rate e ends at expected
// error rate d: solving 1 - d = p*e + (1 - p)(1 - e) gives p = (e - d) / (2e - 1).
// Throws DomainError when e == 0.5 or when p falls outside [0, 1].
double flip_probability(double base_error_rate, double target_error_rate);

// Flips each label independently with the derived probability. A label is flipped when a
// uniform [0,1) draw is below p, one draw per label in order, so the same seed always
// flips the same positions.
std::vector<std::uint8_t> inject_noise(std::span<const std::uint8_t> labels, const NoiseSpec& spec);

struct AuditResult {
  std::size_t sample_size = 0;
  std::size_t errors_found = 0;
  double point_estimate = 0.0;
  double lower = 0.0;  // 95% Wilson score interval
  double upper = 0.0;
};

struct AuditSample {
  std::string image_id;
  std::uint8_t given = 0;
  std::uint8_t truth = 0;
};

// 95% Wilson score interval for k successes in n trials.
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054);

// Throws DomainError on an empty audit.
AuditResult estimate_error_rate(std::span<const AuditSample> audit);

// Columns image_id,given,truth.
std::vector<AuditSample> parse_audit_csv(std::istream& in);
void write_audit_result(std::ostream& out, const AuditResult& result);

struct ClassProbabilities {
  double p_negative = 0.5;
  double p_positive = 0.5;
};

struct IssueFlag {
  std::string image_id;
  std::uint8_t given_label = 0;
  std::uint8_t suggested_label = 0;
  double margin = 0.0;  // opposite-class probability minus that class's threshold
};

// Per-class threshold t_c is the mean predicted probability of class c over samples
// labeled c. A sample is flagged when its opposite-class probability reaches that class's
// threshold and the opposite class is the strict argmax (ties favor the given label).
// Throws DomainError if probabilities do not sum to 1 (within 1e-6) or a class has no
// labeled samples.
std::vector<IssueFlag> flag_label_issues(std::span<const std::string> image_ids,
                                         std::span<const ClassProbabilities> probs,
                                         std::span<const std::uint8_t> labels);

struct ScoredSample {
  std::string image_id;
  std::uint8_t label = 0;
  ClassProbabilities probs;
};

// Columns image_id,label,p_negative,p_positive.
std::vector<ScoredSample> parse_scored_csv(std::istream& in);
// Columns image_id,given,suggested,margin.
void write_issue_flags_csv(std::ostream& out, std::span<const IssueFlag> flags);

}  // namespace wakegen
