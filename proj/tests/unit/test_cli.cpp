#include <doctest.h>

#include <sstream>

#include "cli.hpp"
#include "support.hpp"
#include "wakegen/assembly.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run wakegen_run(std::vector<std::string> args) {
  args.insert(args.begin(), "wakegen");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = wakegen::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string fx(const char* name) { return testutil::fixture(name).string(); }

std::vector<std::string> generate_args(const fs::path& out, const std::string& task = "person.cfg") {
  return {"generate",
          "--task", fx(task.c_str()),
          "--hierarchy", fx("hierarchy.csv"),
          "--train-labels", fx("train_labels.csv"),
          "--train-boxes", fx("train_boxes.csv"),
          "--validation-boxes", fx("validation_boxes.csv"),
          "--test-boxes", fx("test_boxes.csv"),
          "--test-overrides", fx("test_overrides.csv"),
          "--seed", "1",
          "--out", out.string()};
}

Run benchmarks(const fs::path& dir, const std::string& split) {
  return wakegen_run({"benchmarks", "--labels", (dir / (split + ".csv")).string(),
                      "--decisions", (dir / (split + "_decisions.csv")).string(),
                      "--miap", fx("miap.csv"), "--luminance", fx("luminance.csv"),
                      "--split", split, "--out", dir.string()});
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("generate and benchmarks reproduce the golden files") {
    const auto dir = testutil::scratch_dir("cli_golden");
    const auto g = wakegen_run(generate_args(dir));
    INFO(g.err);
    REQUIRE(g.code == 0);
    CHECK(g.out.find("train_large") != std::string::npos);
    REQUIRE(benchmarks(dir, "validation").code == 0);
    REQUIRE(benchmarks(dir, "test").code == 0);
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(testutil::data_dir() / "golden")) {
      const auto name = entry.path().filename();
      INFO(name.string());
      CHECK(testutil::slurp(dir / name) == testutil::slurp(entry.path()));
      ++compared;
    }
    CHECK(compared == 16);
    CHECK(fs::exists(dir / "resolved_config.ini"));
  }

  TEST_CASE("resolved config replays the run") {
    const auto a = testutil::scratch_dir("cli_replay_a");
    const auto b = testutil::scratch_dir("cli_replay_b");
    REQUIRE(wakegen_run(generate_args(a)).code == 0);
    const auto r = wakegen_run({"--config", (a / "resolved_config.ini").string(), "generate", "--out", b.string()});
    INFO(r.err);
    REQUIRE(r.code == 0);
    for (const char* f : {"train_large.csv", "train_quality.csv", "validation.csv", "test.csv", "report.txt"}) {
      CHECK(testutil::slurp(a / f) == testutil::slurp(b / f));
    }
  }

  TEST_CASE("missing input is a usage error naming the path") {
    const auto dir = testutil::scratch_dir("cli_missing");
    auto args = generate_args(dir / "out");
    args[4] = (dir / "no_such_hierarchy.csv").string();
    const auto r = wakegen_run(args);
    CHECK(r.code == 2);
    CHECK(r.err.find("no_such_hierarchy.csv") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out" / "train_large.csv"));
  }

  TEST_CASE("unknown option is a usage error") {
    CHECK(wakegen_run({"generate", "--bogus"}).code == 2);
    CHECK(wakegen_run({"pareto"}).code == 2);
  }

  TEST_CASE("dry run writes nothing") {
    const auto dir = testutil::scratch_dir("cli_dry");
    auto args = generate_args(dir / "out");
    args.push_back("--dry-run");
    const auto r = wakegen_run(args);
    CHECK(r.code == 0);
    CHECK(r.out.find("planned outputs") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out"));
  }

  TEST_CASE("bird task yields a balanced split") {
    const auto dir = testutil::scratch_dir("cli_bird");
    const auto r = wakegen_run(generate_args(dir, "bird.cfg"));
    INFO(r.err);
    REQUIRE(r.code == 0);
    std::ifstream in(dir / "train_large.csv");
    const auto csv = wakegen::read_labels_csv(in, "bird", wakegen::Split::train_large);
    std::size_t pos = 0;
    for (const auto& row : csv.rows) pos += row.label;
    CHECK(pos > 0);
    CHECK(pos * 2 == csv.rows.size());
  }

  TEST_CASE("inject-noise at e == d is the identity") {
    const auto dir = testutil::scratch_dir("cli_noise");
    const auto in = testutil::golden("train_large.csv");
    const auto r = wakegen_run({"inject-noise", "--in", in.string(), "--out", (dir / "n.csv").string(),
                                "--base-error", "0.068", "--target-error", "0.068", "--seed", "3"});
    REQUIRE(r.code == 0);
    CHECK(testutil::slurp(dir / "n.csv") == testutil::slurp(in));
    CHECK(r.out.find("flipped 0 of 20") != std::string::npos);
    const auto bad = wakegen_run({"inject-noise", "--in", in.string(), "--out", (dir / "m.csv").string(),
                                  "--base-error", "0.5", "--target-error", "0.3", "--seed", "3"});
    CHECK(bad.code != 0);
    CHECK_FALSE(fs::exists(dir / "m.csv"));
  }

  TEST_CASE("evaluate perfect predictions") {
    const auto dir = testutil::scratch_dir("cli_eval");
    {
      std::ofstream p(dir / "pred.csv");
      p << "image_id,predicted\n";
      std::ifstream in(testutil::golden("test_benchmarks.csv"));
      for (const auto& row : wakegen::read_labels_csv(in, "person", wakegen::Split::test).rows) {
        p << row.image_id << ',' << int(row.label) << '\n';
      }
    }
    const auto r = wakegen_run({"evaluate", "--predictions", (dir / "pred.csv").string(), "--labels",
                                testutil::golden("test_benchmarks.csv").string(), "--model-name", "oracle",
                                "--out", dir.string()});
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto scores = testutil::slurp(dir / "oracle_scores.csv");
    CHECK(scores.find("all,6,3,0,3,0,1,1,1,1,0\n") != std::string::npos);
    CHECK(fs::exists(dir / "oracle_scores.txt"));
  }

  TEST_CASE("pareto and estimate-error to stdout") {
    const auto r = wakegen_run({"pareto", "--cards", (testutil::data_dir() / "model_cards.csv").string()});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    std::vector<std::string> names;
    std::getline(lines, line);
    while (std::getline(lines, line)) names.push_back(line.substr(0, line.find(',')));
    CHECK(names == std::vector<std::string>{"k_2_c_3", "k_4_c_5", "k_8_c_5", "10fps_vww", "5fps_vww",
                                            "MobileNetV2_0.25", "320kb-1mb_vww"});

    const auto dir = testutil::scratch_dir("cli_audit");
    {
      std::ofstream a(dir / "audit.csv");
      a << "image_id,given,truth\n";
      for (int i = 0; i < 500; ++i) a << 'i' << i << ",1," << (i < 11 ? 0 : 1) << '\n';
    }
    const auto e = wakegen_run({"estimate-error", "--audit", (dir / "audit.csv").string()});
    REQUIRE(e.code == 0);
    CHECK(e.out.find("500,11,0.022,") != std::string::npos);
  }

  TEST_CASE("flag-issues") {
    const auto dir = testutil::scratch_dir("cli_flags");
    {
      std::ofstream s(dir / "scored.csv");
      s << "image_id,label,p_negative,p_positive\nA,0,0.9,0.1\nB,0,0.6,0.4\nC,1,0.1,0.9\nD,1,0.8,0.2\n";
    }
    const auto r = wakegen_run({"flag-issues", "--scored", (dir / "scored.csv").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("image_id,given,suggested,margin\nD,1,0,0.05", 0) == 0);
  }
}
