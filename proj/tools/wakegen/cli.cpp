#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wakegen/assembly.hpp"
#include "wakegen/bench_synth.hpp"
#include "wakegen/csv.hpp"
#include "wakegen/error.hpp"
#include "wakegen/eval_harness.hpp"
#include "wakegen/label_fusion.hpp"
#include "wakegen/oi_ingest.hpp"
#include "wakegen/parallel.hpp"
#include "wakegen/quality_lab.hpp"

namespace fs = std::filesystem;

namespace wakegen::cli {

namespace {

constexpr std::size_t kRejectEchoLimit = 10;

fs::path resolve(const Common& c, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : c.root / path;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open input file " + path.string());
  return in;
}

void require_input(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("cannot open input file " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("cannot create output directory " + dir.string());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
  if (!out.flush()) throw Error("write failed for " + path.string());
}

// Writes to `path`, or to `fallback` when no path was given.
void emit(const Common& c, const std::string& path, const std::string& content,
          std::ostream& fallback) {
  if (path.empty()) {
    fallback << content;
  } else {
    write_file(resolve(c, path), content);
  }
}

unsigned worker_count(const Common& c) {
  return c.workers == 0 ? default_worker_count() : c.workers;
}

Split parse_split(const std::string& s) {
  for (Split v : {Split::train_large, Split::train_quality, Split::validation, Split::test}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown split '" + s + "'");
}

ConfidenceScale parse_scale(const std::string& s) {
  if (s == "detect") return ConfidenceScale::detect;
  if (s == "unit") return ConfidenceScale::unit;
  if (s == "tenths") return ConfidenceScale::tenths;
  throw ConfigError("confidence scale must be detect, unit or tenths, got '" + s + "'");
}

template <class T>
void report_rejects(std::ostream& err, const fs::path& file, const ParseResult<T>& r) {
  for (std::size_t i = 0; i < r.rejects.size() && i < kRejectEchoLimit; ++i) {
    err << file.string() << ": line " << r.rejects[i].line << ": " << r.rejects[i].message << '\n';
  }
  if (r.rejects.size() > kRejectEchoLimit) {
    err << file.string() << ": " << r.rejects.size() - kRejectEchoLimit << " more rejected rows\n";
  }
  for (const auto& w : r.warnings) err << file.string() << ": " << w << '\n';
}

void print_plan(std::ostream& out, const std::string& resolved,
                const std::vector<fs::path>& outputs) {
  out << "dry run, nothing written\n" << resolved << "planned outputs:\n";
  for (const auto& p : outputs) out << "  " << p.string() << '\n';
}

std::string quoted(const fs::path& p) {
  return '"' + fs::absolute(p).lexically_normal().string() + '"';
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

struct SplitJob {
  Split split;
  Labeler labeler;
  std::vector<ImageRecord> records;
  fs::path overrides;
};

}  // namespace

int cmd_generate(const Common& c, const GenerateOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const fs::path task = resolve(c, o.task);
    const fs::path hierarchy = resolve(c, o.hierarchy);
    const fs::path out_dir = resolve(c, o.out);
    const auto opt_path = [&](const std::string& p) { return p.empty() ? fs::path{} : resolve(c, p); };
    const fs::path train_labels = opt_path(o.train_labels);
    const fs::path train_boxes = opt_path(o.train_boxes);
    const fs::path val_boxes = opt_path(o.validation_boxes);
    const fs::path test_boxes = opt_path(o.test_boxes);
    const fs::path val_over = opt_path(o.validation_overrides);
    const fs::path test_over = opt_path(o.test_overrides);
    const ConfidenceScale scale = parse_scale(o.confidence_scale);

    for (const auto& p : {task, hierarchy, train_labels, train_boxes, val_boxes, test_boxes,
                          val_over, test_over}) {
      if (!p.empty()) require_input(p);
    }
    if (train_labels.empty() && train_boxes.empty() && val_boxes.empty() && test_boxes.empty()) {
      throw ConfigError("generate needs at least one of --train-labels, --train-boxes, "
                        "--validation-boxes, --test-boxes");
    }
    if (!val_over.empty() && val_boxes.empty()) throw ConfigError("--validation-overrides needs --validation-boxes");
    if (!test_over.empty() && test_boxes.empty()) throw ConfigError("--test-overrides needs --test-boxes");

    TaskSpec spec;
    {
      auto in = open_input(task);
      try {
        spec = parse_task_spec(in);
      } catch (const ParseError& e) {
        throw ConfigError(task.string() + ": " + e.what());
      }
    }

    std::ostringstream resolved;
    resolved << "# resolved wakegen generate configuration\n[generate]\n"
             << "task = " << quoted(task) << '\n'
             << "hierarchy = " << quoted(hierarchy) << '\n';
    const std::pair<const char*, const fs::path*> optional_inputs[] = {
        {"train-labels", &train_labels},       {"train-boxes", &train_boxes},
        {"validation-boxes", &val_boxes},       {"test-boxes", &test_boxes},
        {"validation-overrides", &val_over},   {"test-overrides", &test_over}};
    for (const auto& [key, path] : optional_inputs) {
      if (!path->empty()) resolved << key << " = " << quoted(*path) << '\n';
    }
    resolved << "out = " << quoted(out_dir) << '\n'
             << "confidence-scale = " << o.confidence_scale << '\n'
             << "seed = " << o.seed << "\n\n[task_spec]\n";
    write_task_spec(resolved, spec);

    std::vector<Split> planned;
    if (!train_labels.empty()) planned.push_back(Split::train_large);
    if (!train_boxes.empty()) planned.push_back(Split::train_quality);
    if (!val_boxes.empty()) planned.push_back(Split::validation);
    if (!test_boxes.empty()) planned.push_back(Split::test);
    std::vector<fs::path> outputs;
    for (Split split : planned) {
      outputs.push_back(out_dir / (std::string(to_string(split)) + ".csv"));
      outputs.push_back(out_dir / (std::string(to_string(split)) + "_decisions.csv"));
    }
    for (const char* f : {"report.txt", "report.csv", "resolved_config.ini"}) outputs.push_back(out_dir / f);

    if (c.dry_run) {
      print_plan(out, resolved.str(), outputs);
      return 0;
    }

    LabelHierarchy h;
    {
      auto in = open_input(hierarchy);
      h = parse_hierarchy(in);
    }

    std::ostringstream input_summary;
    ParseResult<ImageLevelLabel> labels;
    if (!train_labels.empty()) {
      auto in = open_input(train_labels);
      labels = parse_image_labels(in, scale);
      report_rejects(err, train_labels, labels);
      input_summary << train_labels.filename().string() << ": " << labels.rows_in << " rows, "
                    << labels.rejects.size() << " rejected\n";
    }
    const auto load_boxes = [&](const fs::path& p) {
      ParseResult<BoxAnnotation> r;
      if (p.empty()) return r;
      auto in = open_input(p);
      r = parse_boxes(in);
      report_rejects(err, p, r);
      input_summary << p.filename().string() << ": " << r.rows_in << " rows, "
                    << r.rejects.size() << " rejected\n";
      return r;
    };
    auto tboxes = load_boxes(train_boxes);
    auto vboxes = load_boxes(val_boxes);
    auto sboxes = load_boxes(test_boxes);

    // Labels seen in the metadata are known labels even when the hierarchy omits them.
    for (const auto& l : labels.records) h.register_label(l.label_id);
    for (const auto* r : {&tboxes, &vboxes, &sboxes}) {
      for (const auto& b : r->records) h.register_label(b.label_id);
    }
    const ClassSet cs = resolve_class_set(h, spec);

    std::vector<SplitJob> jobs;
    if (!train_labels.empty()) {
      auto records = group_by_image(labels.records, tboxes.records);
      std::erase_if(records, [](const ImageRecord& r) { return r.labels.empty(); });
      jobs.push_back({Split::train_large, Labeler::image_level, std::move(records), {}});
    }
    if (!train_boxes.empty()) {
      jobs.push_back({Split::train_quality, Labeler::bounding_box,
                      group_by_image({}, std::move(tboxes.records)), {}});
    }
    labels = {};
    if (!val_boxes.empty()) {
      jobs.push_back({Split::validation, Labeler::bounding_box,
                      group_by_image({}, std::move(vboxes.records)), val_over});
    }
    if (!test_boxes.empty()) {
      jobs.push_back({Split::test, Labeler::bounding_box,
                      group_by_image({}, std::move(sboxes.records)), test_over});
    }

    const unsigned workers = worker_count(c);
    std::vector<std::pair<std::string, SplitReport>> reports;
    std::vector<DatasetRow> all_rows;
    std::map<fs::path, std::string> files;
    std::ostringstream report_text;
    report_text << "task " << spec.label_name << ", seed " << o.seed << '\n'
                << input_summary.str() << '\n';
    for (auto& job : jobs) {
      auto result = build_split(job.records, job.labeler, job.split, cs, spec, o.seed, workers);
      job.records.clear();
      const std::string name(to_string(job.split));
      std::size_t changed = 0;
      std::size_t override_count = 0;
      std::size_t skipped = 0;
      if (!job.overrides.empty()) {
        auto in = open_input(job.overrides);
        auto overrides = parse_overrides(in);
        override_count = overrides.size();
        // Images labeled but not kept (excluded or dropped by balancing) cannot be corrected.
        std::set<std::string> kept, seen;
        for (const auto& r : result.rows) kept.insert(r.image_id);
        for (const auto& d : result.decisions) seen.insert(d.image_id);
        std::erase_if(overrides, [&](const LabelOverride& ov) {
          if (kept.count(ov.image_id) || !seen.count(ov.image_id)) return false;
          err << "warning: " << name << " override for " << ov.image_id
              << " skipped, image not in the balanced split\n";
          ++skipped;
          return true;
        });
        changed = apply_overrides(result.rows, overrides);
      }
      std::ostringstream csv_out;
      write_labels_csv(csv_out, result.rows, spec.label_name);
      files[out_dir / (name + ".csv")] = csv_out.str();
      std::ostringstream dec_out;
      write_decisions_csv(dec_out, result.decisions);
      files[out_dir / (name + "_decisions.csv")] = dec_out.str();

      write_split_report_text(report_text, name, result.report);
      if (!job.overrides.empty()) {
        report_text << "  overrides        " << override_count << " (" << changed
                    << " labels changed";
        if (skipped) report_text << ", " << skipped << " skipped";
        report_text << ")\n";
      }
      reports.emplace_back(name, result.report);
      all_rows.insert(all_rows.end(), std::make_move_iterator(result.rows.begin()),
                      std::make_move_iterator(result.rows.end()));
    }
    check_split_hygiene(all_rows);

    std::ostringstream report_csv;
    write_split_reports_csv(report_csv, reports);
    files[out_dir / "report.txt"] = report_text.str();
    files[out_dir / "report.csv"] = report_csv.str();
    files[out_dir / "resolved_config.ini"] = resolved.str();

    ensure_dir(out_dir);
    for (const auto& [path, content] : files) write_file(path, content);
    out << report_text.str();
    return 0;
  });
}

int cmd_benchmarks(const Common& c, const BenchmarksOptions& o, std::ostream& out,
                   std::ostream& err) {
  return guarded(err, [&] {
    const fs::path labels_path = resolve(c, o.labels);
    const fs::path decisions_path = resolve(c, o.decisions);
    const fs::path out_dir = resolve(c, o.out);
    const fs::path miap_path = o.miap.empty() ? fs::path{} : resolve(c, o.miap);
    if (o.luminance.empty() == o.images.empty()) {
      throw ConfigError("benchmarks needs exactly one of --luminance or --images");
    }
    const fs::path lum_path = o.luminance.empty() ? fs::path{} : resolve(c, o.luminance);
    const fs::path images_dir = o.images.empty() ? fs::path{} : resolve(c, o.images);
    for (const auto& p : {labels_path, decisions_path, miap_path, lum_path}) {
      if (!p.empty()) require_input(p);
    }
    if (!images_dir.empty() && !fs::is_directory(images_dir)) {
      throw ConfigError("image directory not found " + images_dir.string());
    }
    const Split split = parse_split(o.split);
    const std::string name = o.name.empty() ? labels_path.stem().string() : o.name;

    std::vector<fs::path> outputs = {out_dir / (name + "_benchmarks.csv"),
                                     out_dir / (name + "_subset_sizes.txt"),
                                     out_dir / (name + "_subset_sizes.csv")};
    if (!images_dir.empty()) outputs.push_back(out_dir / (name + "_luminance.csv"));
    if (c.dry_run) {
      std::ostringstream resolved;
      resolved << "[benchmarks]\nlabels = " << quoted(labels_path) << "\ndecisions = "
               << quoted(decisions_path) << '\n';
      if (!miap_path.empty()) resolved << "miap = " << quoted(miap_path) << '\n';
      if (!lum_path.empty()) resolved << "luminance = " << quoted(lum_path) << '\n';
      if (!images_dir.empty()) resolved << "images = " << quoted(images_dir) << '\n';
      resolved << "label-name = " << o.label_name << "\nsplit = " << o.split << "\nname = " << name
               << "\nout = " << quoted(out_dir) << '\n';
      print_plan(out, resolved.str(), outputs);
      return 0;
    }

    LabelCsv labeled;
    {
      auto in = open_input(labels_path);
      labeled = read_labels_csv(in, o.label_name, split);
    }
    std::unordered_map<std::string, BoxDecision> decisions;
    {
      auto in = open_input(decisions_path);
      for (auto& d : read_decisions_csv(in)) decisions.emplace(d.image_id, d.boxes);
    }
    std::unordered_map<std::string, std::vector<MiapAnnotation>> miap;
    if (!miap_path.empty()) {
      auto in = open_input(miap_path);
      auto parsed = parse_miap(in);
      report_rejects(err, miap_path, parsed);
      for (auto& m : parsed.records) miap[m.image_id].push_back(std::move(m));
    }

    std::unordered_map<std::string, LuminanceStat> luminance;
    std::map<fs::path, std::string> files;
    if (!lum_path.empty()) {
      auto in = open_input(lum_path);
      luminance = parse_luminance_csv(in);
    } else {
      const auto& rows = labeled.rows;
      std::vector<LuminanceStat> stats(rows.size());
      parallel_for(rows.size(), worker_count(c), [&](std::size_t i) {
        fs::path found;
        for (const char* ext : {".png", ".ppm"}) {
          const fs::path candidate = images_dir / (rows[i].image_id + ext);
          if (fs::is_regular_file(candidate)) {
            found = candidate;
            break;
          }
        }
        if (found.empty()) {
          throw ConfigError("no .png or .ppm image for " + rows[i].image_id + " in " +
                            images_dir.string());
        }
        stats[i] = mean_grayscale(load_image(found).view());
      });
      std::map<std::string, LuminanceStat> ordered;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        luminance.emplace(rows[i].image_id, stats[i]);
        ordered.emplace(rows[i].image_id, stats[i]);
      }
      std::ostringstream lum_out;
      write_luminance_csv(lum_out, ordered);
      files[out_dir / (name + "_luminance.csv")] = lum_out.str();
    }

    const auto synth = synthesize(labeled.rows, decisions, miap, luminance);
    std::ostringstream flagged;
    write_labels_csv(flagged, labeled.rows, synth.flags, o.label_name);
    files[out_dir / (name + "_benchmarks.csv")] = flagged.str();
    const std::pair<std::string, SubsetCounts> sizes[] = {{name, synth.counts}};
    std::ostringstream sizes_txt;
    std::ostringstream sizes_csv;
    write_subset_sizes_text(sizes_txt, sizes);
    write_subset_sizes_csv(sizes_csv, sizes);
    files[out_dir / (name + "_subset_sizes.txt")] = sizes_txt.str();
    files[out_dir / (name + "_subset_sizes.csv")] = sizes_csv.str();

    ensure_dir(out_dir);
    for (const auto& [path, content] : files) write_file(path, content);
    out << sizes_txt.str();
    return 0;
  });
}

int cmd_inject_noise(const Common& c, const InjectNoiseOptions& o, std::ostream& out,
                     std::ostream& err) {
  return guarded(err, [&] {
    const fs::path in_path = resolve(c, o.in);
    const fs::path out_path = resolve(c, o.out);
    require_input(in_path);
    // Validates the rates before any reading.
    const double p = flip_probability(o.base_error, o.target_error);
    if (c.dry_run) {
      std::ostringstream resolved;
      resolved << "[inject-noise]\nin = " << quoted(in_path) << "\nout = " << quoted(out_path)
               << "\nlabel-column = " << o.label_column << "\nbase-error = "
               << csv::format_double(o.base_error) << "\ntarget-error = "
               << csv::format_double(o.target_error) << "\nseed = " << o.seed
               << "\n# flip probability " << csv::format_double(p) << '\n';
      print_plan(out, resolved.str(), {out_path});
      return 0;
    }

    auto in = open_input(in_path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
    if (lines.empty()) throw SchemaError(in_path.string() + " has no header row");

    const auto header_fields = csv::split_line(lines[0]);
    std::vector<std::string> names = header_fields ? *header_fields : std::vector<std::string>{};
    if (!names.empty() && names[0].rfind("\xEF\xBB\xBF", 0) == 0) names[0].erase(0, 3);
    for (auto& n : names) n = std::string(csv::trim(n));
    const auto col_it = std::find(names.begin(), names.end(), o.label_column);
    if (col_it == names.end()) {
      throw SchemaError(in_path.string() + " has no column '" + o.label_column + "'");
    }
    const auto col = static_cast<std::size_t>(col_it - names.begin());

    std::vector<std::size_t> data_lines;
    std::vector<std::uint8_t> labels;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      std::string_view line = lines[i];
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (csv::trim(line).empty()) continue;
      const auto f = csv::split_line(line);
      if (!f || f->size() <= col) throw ParseError(i + 1, "missing label column");
      const auto v = csv::trim((*f)[col]);
      if (v != "0" && v != "1") throw ParseError(i + 1, o.label_column + " must be 0 or 1");
      data_lines.push_back(i);
      labels.push_back(v == "1" ? 1 : 0);
    }

    const auto noisy = inject_noise(labels, {o.base_error, o.target_error, o.seed});
    std::size_t flipped = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (noisy[k] == labels[k]) continue;
      ++flipped;
      std::string& line = lines[data_lines[k]];
      const bool cr = !line.empty() && line.back() == '\r';
      if (cr) line.pop_back();
      auto fields = *csv::split_line(line);
      fields[col] = noisy[k] ? "1" : "0";
      std::ostringstream rebuilt;
      csv::write_row(rebuilt, fields);
      line = rebuilt.str();
      if (!line.empty() && line.back() == '\n') line.pop_back();
      if (cr) line.push_back('\r');
    }

    std::string content;
    for (const auto& line : lines) {
      content += line;
      content += '\n';
    }
    write_file(out_path, content);
    out << "flip probability " << csv::format_double(p) << ", flipped " << flipped << " of "
        << labels.size() << " labels\n";
    return 0;
  });
}

int cmd_estimate_error(const Common& c, const EstimateErrorOptions& o, std::ostream& out,
                       std::ostream& err) {
  return guarded(err, [&] {
    const fs::path audit = resolve(c, o.audit);
    require_input(audit);
    if (c.dry_run) {
      std::ostringstream resolved;
      resolved << "[estimate-error]\naudit = " << quoted(audit) << '\n';
      if (!o.out.empty()) resolved << "out = " << quoted(resolve(c, o.out)) << '\n';
      print_plan(out, resolved.str(), o.out.empty() ? std::vector<fs::path>{} : std::vector{resolve(c, o.out)});
      return 0;
    }
    auto in = open_input(audit);
    const auto samples = parse_audit_csv(in);
    std::ostringstream result;
    write_audit_result(result, estimate_error_rate(samples));
    emit(c, o.out, result.str(), out);
    return 0;
  });
}

int cmd_evaluate(const Common& c, const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const fs::path preds_path = resolve(c, o.predictions);
    const fs::path labels_path = resolve(c, o.labels);
    const fs::path out_dir = resolve(c, o.out);
    require_input(preds_path);
    require_input(labels_path);
    const Split split = parse_split(o.split);
    SingleClassScoring scoring;
    if (o.single_class == "pool") {
      scoring = SingleClassScoring::pool_opposite_class;
    } else if (o.single_class == "accuracy") {
      scoring = SingleClassScoring::accuracy_only;
    } else {
      throw ConfigError("--single-class must be pool or accuracy");
    }
    const std::vector<fs::path> outputs = {out_dir / (o.model_name + "_scores.csv"),
                                           out_dir / (o.model_name + "_scores.txt")};
    if (c.dry_run) {
      std::ostringstream resolved;
      resolved << "[evaluate]\npredictions = " << quoted(preds_path) << "\nlabels = "
               << quoted(labels_path) << "\nlabel-name = " << o.label_name << "\nsplit = " << o.split
               << "\nmodel-name = " << o.model_name << "\nsingle-class = " << o.single_class
               << "\nout = " << quoted(out_dir) << '\n';
      print_plan(out, resolved.str(), outputs);
      return 0;
    }

    std::vector<PredictionRecord> preds;
    {
      auto in = open_input(preds_path);
      preds = parse_predictions(in);
    }
    LabelCsv labeled;
    {
      auto in = open_input(labels_path);
      labeled = read_labels_csv(in, o.label_name, split);
    }
    std::unordered_map<std::string, std::uint8_t> truth;
    for (const auto& r : labeled.rows) truth.emplace(r.image_id, r.label);
    const auto cm = confusion(preds, truth);
    if (!cm.missing.empty()) {
      err << "warning: " << cm.missing.size() << " labeled images have no prediction\n";
    }

    std::vector<SubsetScore> scores;
    if (labeled.flags.empty()) {
      SubsetScore all{"all", labeled.rows.size(), std::nullopt, std::nullopt, false};
      if (cm.matrix.total()) {
        all.matrix = cm.matrix;
        all.metrics = metrics(cm.matrix);
      }
      scores.push_back(std::move(all));
    } else {
      scores = subset_metrics(preds, labeled.rows, labeled.flags, scoring);
    }
    std::ostringstream csv_out;
    std::ostringstream txt_out;
    write_subset_scores_csv(csv_out, scores);
    write_subset_scores_text(txt_out, scores, o.model_name);
    ensure_dir(out_dir);
    write_file(outputs[0], csv_out.str());
    write_file(outputs[1], txt_out.str());
    out << txt_out.str();
    return 0;
  });
}

int cmd_pareto(const Common& c, const ParetoOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const fs::path cards_path = resolve(c, o.cards);
    require_input(cards_path);
    if (c.dry_run) {
      std::ostringstream resolved;
      resolved << "[pareto]\ncards = " << quoted(cards_path) << '\n';
      print_plan(out, resolved.str(), o.out.empty() ? std::vector<fs::path>{} : std::vector{resolve(c, o.out)});
      return 0;
    }
    auto in = open_input(cards_path);
    const auto cards = parse_model_cards(in);
    std::ostringstream result;
    write_model_cards(result, pareto_frontier(cards));
    emit(c, o.out, result.str(), out);
    return 0;
  });
}

int cmd_flag_issues(const Common& c, const FlagIssuesOptions& o, std::ostream& out,
                    std::ostream& err) {
  return guarded(err, [&] {
    const fs::path scored_path = resolve(c, o.scored);
    require_input(scored_path);
    if (c.dry_run) {
      std::ostringstream resolved;
      resolved << "[flag-issues]\nscored = " << quoted(scored_path) << '\n';
      print_plan(out, resolved.str(), o.out.empty() ? std::vector<fs::path>{} : std::vector{resolve(c, o.out)});
      return 0;
    }
    auto in = open_input(scored_path);
    const auto samples = parse_scored_csv(in);
    std::vector<std::string> ids;
    std::vector<ClassProbabilities> probs;
    std::vector<std::uint8_t> labels;
    for (const auto& s : samples) {
      ids.push_back(s.image_id);
      probs.push_back(s.probs);
      labels.push_back(s.label);
    }
    std::ostringstream result;
    write_issue_flags_csv(result, flag_label_issues(ids, probs, labels));
    emit(c, o.out, result.str(), out);
    return 0;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Binary person-detection dataset generation and evaluation toolkit", "wakegen"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI/TOML file");
  app.allow_config_extras(CLI::config_extras_mode::ignore);

  Common common;
  std::string root = ".";
  app.add_option("--root", root, "Base directory for relative paths");
  app.add_option("--workers", common.workers, "Worker threads (default: logical cores)");

  const auto add_dry_run = [&](CLI::App* sub) {
    sub->add_flag("--dry-run", common.dry_run, "Print the resolved config and planned outputs");
  };

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Label, balance and write the dataset splits");
  g->add_option("--task", gen.task, "Task spec file")->required();
  g->add_option("--hierarchy", gen.hierarchy, "Label hierarchy edge list")->required();
  g->add_option("--train-labels", gen.train_labels, "Image-level labels for the large split");
  g->add_option("--train-boxes", gen.train_boxes, "Box annotations for the quality split");
  g->add_option("--validation-boxes", gen.validation_boxes, "Validation box annotations");
  g->add_option("--test-boxes", gen.test_boxes, "Test box annotations");
  g->add_option("--validation-overrides", gen.validation_overrides, "image_id,label corrections");
  g->add_option("--test-overrides", gen.test_overrides, "image_id,label corrections");
  g->add_option("--confidence-scale", gen.confidence_scale, "detect, unit or tenths");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--seed", gen.seed, "Balancing seed")->required();
  add_dry_run(g);

  BenchmarksOptions bench;
  auto* b = app.add_subcommand("benchmarks", "Attach fine-grained benchmark flags to a split");
  b->add_option("--labels", bench.labels, "Split CSV")->required();
  b->add_option("--decisions", bench.decisions, "Decisions CSV of the split")->required();
  b->add_option("--miap", bench.miap, "MIAP demographic annotations");
  b->add_option("--luminance", bench.luminance, "image_id,mean_gray CSV");
  b->add_option("--images", bench.images, "Directory of <image_id>.png or .ppm files");
  b->add_option("--label-name", bench.label_name, "Label column name");
  b->add_option("--split", bench.split, "validation or test");
  b->add_option("--name", bench.name, "Output file prefix");
  b->add_option("--out", bench.out, "Output directory")->required();
  add_dry_run(b);

  InjectNoiseOptions noise;
  auto* n = app.add_subcommand("inject-noise", "Flip labels to reach a target error rate");
  n->add_option("--in", noise.in, "Labels CSV")->required();
  n->add_option("--out", noise.out, "Noisy labels CSV")->required();
  n->add_option("--label-column", noise.label_column, "Column holding the 0/1 label");
  n->add_option("--base-error", noise.base_error, "Error rate already in the labels")->required();
  n->add_option("--target-error", noise.target_error, "Desired error rate")->required();
  n->add_option("--seed", noise.seed, "Flip seed")->required();
  add_dry_run(n);

  EstimateErrorOptions est;
  auto* e = app.add_subcommand("estimate-error", "Error rate and Wilson interval from an audit");
  e->add_option("--audit", est.audit, "image_id,given,truth CSV")->required();
  e->add_option("--out", est.out, "Result CSV (default stdout)");
  add_dry_run(e);

  EvaluateOptions eval;
  auto* v = app.add_subcommand("evaluate", "Per-subset metrics for a prediction file");
  v->add_option("--predictions", eval.predictions, "image_id,predicted[,score] CSV")->required();
  v->add_option("--labels", eval.labels, "Split CSV, optionally with benchmark flags")->required();
  v->add_option("--label-name", eval.label_name, "Label column name");
  v->add_option("--split", eval.split, "validation or test");
  v->add_option("--model-name", eval.model_name, "Name used in the report");
  v->add_option("--single-class", eval.single_class, "pool or accuracy");
  v->add_option("--out", eval.out, "Output directory")->required();
  add_dry_run(v);

  ParetoOptions par;
  auto* p = app.add_subcommand("pareto", "Accuracy versus MACs Pareto frontier");
  p->add_option("--cards", par.cards, "name,macs,flash_bytes,ram_bytes,accuracy CSV")->required();
  p->add_option("--out", par.out, "Frontier CSV (default stdout)");
  add_dry_run(p);

  FlagIssuesOptions flag;
  auto* f = app.add_subcommand("flag-issues", "Confident-learning label issue flags");
  f->add_option("--scored", flag.scored, "image_id,label,p_negative,p_positive CSV")->required();
  f->add_option("--out", flag.out, "Issue CSV (default stdout)");
  add_dry_run(f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? 0 : 2;
  }
  common.root = root;

  if (g->parsed()) return cmd_generate(common, gen, out, err);
  if (b->parsed()) return cmd_benchmarks(common, bench, out, err);
  if (n->parsed()) return cmd_inject_noise(common, noise, out, err);
  if (e->parsed()) return cmd_estimate_error(common, est, out, err);
  if (v->parsed()) return cmd_evaluate(common, eval, out, err);
  if (p->parsed()) return cmd_pareto(common, par, out, err);
  if (f->parsed()) return cmd_flag_issues(common, flag, out, err);
  return 2;
}

}  // namespace wakegen::cli
