#pragma once

// Subcommands of the wakegen binary. Each cmd_* returns the process exit status:
// 0 success, 1 runtime failure, 2 usage or configuration error (including a missing
// input file). Relative paths are resolved against `root`.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>

namespace wakegen::cli {

struct Common {
  std::filesystem::path root = ".";
  unsigned workers = 0;  // 0 means one per logical core
  bool dry_run = false;
};

struct GenerateOptions {
  std::string task;
  std::string hierarchy;
  std::string train_labels;
  std::string train_boxes;
  std::string validation_boxes;
  std::string test_boxes;
  std::string validation_overrides;
  std::string test_overrides;
  std::string out;
  std::string confidence_scale = "detect";  // detect, unit or tenths
  std::uint64_t seed = 0;
};

struct BenchmarksOptions {
  std::string labels;     // split CSV written by generate
  std::string decisions;  // matching <split>_decisions.csv
  std::string miap;
  std::string luminance;  // image_id,mean_gray
  std::string images;     // or a directory of <image_id>.png / .ppm files
  std::string label_name = "person";
  std::string split = "test";
  std::string name;  // output prefix; defaults to the labels file stem
  std::string out;
};

struct InjectNoiseOptions {
  std::string in;
  std::string out;
  std::string label_column = "person";
  double base_error = 0.0;
  double target_error = 0.0;
  std::uint64_t seed = 0;
};

struct EstimateErrorOptions {
  std::string audit;
  std::string out;  // stdout when empty
};

struct EvaluateOptions {
  std::string predictions;
  std::string labels;
  std::string label_name = "person";
  std::string split = "test";
  std::string model_name = "model";
  std::string single_class = "pool";  // pool or accuracy
  std::string out;
};

struct ParetoOptions {
  std::string cards;
  std::string out;  // stdout when empty
};

struct FlagIssuesOptions {
  std::string scored;
  std::string out;  // stdout when empty
};

int cmd_generate(const Common& common, const GenerateOptions& opts, std::ostream& out,
                 std::ostream& err);
int cmd_benchmarks(const Common& common, const BenchmarksOptions& opts, std::ostream& out,
                   std::ostream& err);
int cmd_inject_noise(const Common& common, const InjectNoiseOptions& opts, std::ostream& out,
                     std::ostream& err);
int cmd_estimate_error(const Common& common, const EstimateErrorOptions& opts, std::ostream& out,
                       std::ostream& err);
int cmd_evaluate(const Common& common, const EvaluateOptions& opts, std::ostream& out,
                 std::ostream& err);
int cmd_pareto(const Common& common, const ParetoOptions& opts, std::ostream& out,
               std::ostream& err);
int cmd_flag_issues(const Common& common, const FlagIssuesOptions& opts, std::ostream& out,
                    std::ostream& err);

// Parses argv and dispatches to one subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wakegen::cli
