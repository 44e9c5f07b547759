#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "wakegen/error.hpp"
#include "wakegen/label_fusion.hpp"
#include "wakegen/rng.hpp"

using namespace wakegen;
using testutil::machine;
using testutil::verified;

namespace {

LabelHierarchy fixture_hierarchy() {
  std::ifstream in(testutil::fixture("hierarchy.csv"));
  return parse_hierarchy(in);
}

TaskSpec person_spec() {
  std::ifstream in(testutil::fixture("person.cfg"));
  return parse_task_spec(in);
}

// Evidence one label contributes, ranked by precedence when combined.
enum Evidence { none = 0, verified_absence = 1, disabled_part_hit = 2, low = 3, confident = 4 };

enum class Cls { target, part, unrelated };

Evidence oracle_evidence(Cls cls, LabelSource src, double conf, bool parts_on) {
  if (cls == Cls::unrelated) return none;
  if (cls == Cls::part && !parts_on) return conf >= 7 ? disabled_part_hit : none;
  if (conf >= 7) return confident;
  if (conf > 0) return low;
  return src == LabelSource::human_verified ? verified_absence : none;
}

TriLabel oracle_label(Evidence e, bool strict) {
  switch (e) {
    case confident: return {TriValue::positive, LabelReason::confident_match};
    case low: return {TriValue::excluded, LabelReason::low_confidence};
    case disabled_part_hit: return {TriValue::negative, LabelReason::part_only_disabled};
    case verified_absence: return {TriValue::negative, LabelReason::verified_absent};
    case none: break;
  }
  return strict ? TriLabel{TriValue::excluded, LabelReason::no_annotation}
                : TriLabel{TriValue::negative, LabelReason::no_annotation};
}

struct LabelCase {
  Cls cls;
  LabelSource src;
  double conf;
};

std::vector<LabelCase> all_label_cases() {
  std::vector<LabelCase> cases;
  for (Cls cls : {Cls::target, Cls::part, Cls::unrelated}) {
    for (LabelSource src : {LabelSource::machine_generated, LabelSource::human_verified}) {
      for (double conf : {0.0, 3.0, 6.0, 7.0, 10.0}) {
        // Human verification only produces 0 or 10.
        if (src == LabelSource::human_verified && conf != 0.0 && conf != 10.0) continue;
        cases.push_back({cls, src, conf});
      }
    }
  }
  return cases;
}

std::string id_for(Cls cls) {
  switch (cls) {
    case Cls::target: return "person";
    case Cls::part: return "human_hand";
    case Cls::unrelated: return "dog";
  }
  return "";
}

}  // namespace

TEST_SUITE("label_fusion") {
  TEST_CASE("task spec: defaults, parse, write round trip") {
    const TaskSpec d;
    CHECK(d.treat_parts_as_target);
    CHECK(d.depiction_policy == DepictionPolicy::negative);
    CHECK(d.min_confidence == 7.0);
    CHECK(d.min_area_fraction == 0.05);

    const auto spec = person_spec();
    CHECK(spec.target_label_ids == std::set<std::string>{"person"});
    CHECK(spec.synonym_label_ids == std::set<std::string>{"human", "child"});
    CHECK(spec.core_part_label_ids.size() == 3);
    std::ostringstream out;
    write_task_spec(out, spec);
    std::istringstream back(out.str());
    const auto again = parse_task_spec(back);
    CHECK(again.target_label_ids == spec.target_label_ids);
    CHECK(again.synonym_label_ids == spec.synonym_label_ids);
    CHECK(again.core_part_label_ids == spec.core_part_label_ids);
    CHECK(again.min_confidence == spec.min_confidence);
    CHECK(again.min_area_fraction == spec.min_area_fraction);
    CHECK(again.label_name == spec.label_name);
  }

  TEST_CASE("task spec: rejects bad input") {
    const auto parse = [](const std::string& s) {
      std::istringstream in(s);
      return parse_task_spec(in);
    };
    CHECK_THROWS_AS(parse("target_label_ids = a\ncolour = red\n"), ConfigError);
    CHECK_THROWS_AS(parse("target_label_ids = a\ntarget_label_ids = b\n"), ParseError);
    CHECK_THROWS_AS(parse("target_label_ids = a\nmin_confidence = 11\n"), ConfigError);
    CHECK_THROWS_AS(parse("target_label_ids = a\nmin_area_fraction = -0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse("target_label_ids = a\nsynonym_label_ids = a\n"), ConfigError);
    CHECK_THROWS_AS(parse("min_confidence = 5\n"), ConfigError);
    CHECK_THROWS_AS(parse("target_label_ids = a\ndepiction_policy = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse("no equals sign\n"), ParseError);
    const auto ok = parse("target_label_ids = a\ndepiction_policy = exclude\nstrict_negatives = true\n");
    CHECK(ok.depiction_policy == DepictionPolicy::exclude);
    CHECK(ok.strict_negatives);
  }

  TEST_CASE("resolve: subcategories, core parts, gated parts, synonyms") {
    const auto cs = resolve_class_set(fixture_hierarchy(), person_spec());
    for (const char* id : {"person", "woman", "man", "girl", "boy", "human_body", "human_face",
                           "human_head", "human", "child"}) {
      CHECK_MESSAGE(cs.positive_ids.count(id), id);
    }
    CHECK(cs.conditional_part_ids == std::set<std::string>{"beard", "human_foot", "human_hand"});
    CHECK(cs.image_level_only_ids == std::set<std::string>{"child", "human"});
    CHECK_FALSE(cs.positive_ids.count("dog"));
  }

  TEST_CASE("resolve: leaf target in an empty hierarchy") {
    LabelHierarchy h;
    h.register_label("bird");
    TaskSpec spec;
    spec.label_name = "bird";
    spec.target_label_ids = {"bird"};
    const auto cs = resolve_class_set(h, spec);
    CHECK(cs.positive_ids == std::set<std::string>{"bird"});
    CHECK(cs.conditional_part_ids.empty());
  }

  TEST_CASE("resolve: bird task closes over sparrow and gates wing") {
    TaskSpec spec;
    spec.target_label_ids = {"bird"};
    const auto cs = resolve_class_set(fixture_hierarchy(), spec);
    CHECK(cs.positive_ids == std::set<std::string>{"bird", "sparrow"});
    CHECK(cs.conditional_part_ids == std::set<std::string>{"wing"});
  }

  TEST_CASE("resolve: unknown ids") {
    TaskSpec spec;
    spec.target_label_ids = {"unicorn"};
    CHECK_THROWS_AS(resolve_class_set(fixture_hierarchy(), spec), UnknownLabelError);
    spec.target_label_ids = {"person"};
    spec.core_part_label_ids = {"tail"};
    CHECK_THROWS_AS(resolve_class_set(fixture_hierarchy(), spec), UnknownLabelError);
    // Synonyms need not be registered.
    spec.core_part_label_ids = {};
    spec.synonym_label_ids = {"homo_sapiens"};
    CHECK(resolve_class_set(fixture_hierarchy(), spec).positive_ids.count("homo_sapiens"));
  }

  TEST_CASE("property: closure idempotence") {
    const auto h = fixture_hierarchy();
    const auto spec = person_spec();
    const auto cs = resolve_class_set(h, spec);
    TaskSpec fed = spec;
    fed.target_label_ids.clear();
    for (const auto& id : cs.positive_ids) {
      if (!cs.image_level_only_ids.count(id) && !spec.core_part_label_ids.count(id)) {
        fed.target_label_ids.insert(id);
      }
    }
    fed.synonym_label_ids = cs.image_level_only_ids;
    CHECK(resolve_class_set(h, fed) == cs);
  }

  TEST_CASE("image level: worked examples") {
    const auto spec = person_spec();
    const auto cs = resolve_class_set(fixture_hierarchy(), spec);
    const auto label = [&](std::vector<ImageLevelLabel> ls) { return image_level_label(ls, cs, spec); };
    CHECK(label({machine("i", "person", 8)}) == TriLabel{TriValue::positive, LabelReason::confident_match});
    CHECK(label({verified("i", "person", false)}) == TriLabel{TriValue::negative, LabelReason::verified_absent});
    CHECK(label({machine("i", "person", 6)}) == TriLabel{TriValue::excluded, LabelReason::low_confidence});
    CHECK(label({machine("i", "person", 7)}).value == TriValue::positive);
    CHECK(label({machine("i", "person", 6.99)}).value == TriValue::excluded);
    CHECK(label({}) == TriLabel{TriValue::negative, LabelReason::no_annotation});
    CHECK(label({machine("i", "human", 9)}).value == TriValue::positive);
    CHECK(label({machine("i", "woman", 9)}).value == TriValue::positive);
    CHECK(label({machine("i", "dog", 10)}).value == TriValue::negative);
  }

  TEST_CASE("image level: conflicting duplicates resolve positive and are flagged") {
    const auto spec = person_spec();
    const auto cs = resolve_class_set(fixture_hierarchy(), spec);
    const std::vector<ImageLevelLabel> ls = {verified("i", "person", true), verified("i", "person", false)};
    CHECK(image_level_label(ls, cs, spec).value == TriValue::positive);
    CHECK(has_label_conflict(ls, cs, spec));
    const std::vector<ImageLevelLabel> clean = {verified("i", "person", true)};
    CHECK_FALSE(has_label_conflict(clean, cs, spec));
  }

  TEST_CASE("oracle: every single label, both part settings, both negative modes") {
    const auto h = fixture_hierarchy();
    std::size_t checked = 0;
    for (bool parts_on : {true, false}) {
      for (bool strict : {false, true}) {
        auto spec = person_spec();
        spec.treat_parts_as_target = parts_on;
        spec.strict_negatives = strict;
        const auto cs = resolve_class_set(h, spec);
        for (const auto& c : all_label_cases()) {
          const std::vector<ImageLevelLabel> ls = {{"i", id_for(c.cls), c.src, c.conf}};
          const auto got = image_level_label(ls, cs, spec);
          const auto want = oracle_label(oracle_evidence(c.cls, c.src, c.conf, parts_on), strict);
          CHECK(got == want);
          CHECK(is_consistent(got));
          ++checked;
        }
      }
    }
    CHECK(checked == 4 * 21);
  }

  TEST_CASE("oracle: every pair of labels") {
    const auto h = fixture_hierarchy();
    const auto cases = all_label_cases();
    for (bool parts_on : {true, false}) {
      auto spec = person_spec();
      spec.treat_parts_as_target = parts_on;
      const auto cs = resolve_class_set(h, spec);
      for (const auto& a : cases) {
        for (const auto& b : cases) {
          const std::vector<ImageLevelLabel> ls = {{"i", id_for(a.cls), a.src, a.conf},
                                                   {"i", id_for(b.cls), b.src, b.conf}};
          const Evidence e = std::max(oracle_evidence(a.cls, a.src, a.conf, parts_on),
                                      oracle_evidence(b.cls, b.src, b.conf, parts_on));
          CHECK(image_level_label(ls, cs, spec) == oracle_label(e, false));
        }
      }
    }
  }

  TEST_CASE("property: raising the threshold never creates positives") {
    const auto h = fixture_hierarchy();
    const auto base = person_spec();
    const auto cs = resolve_class_set(h, base);
    const std::vector<std::string> ids = {"person", "woman", "human", "human_hand", "dog", "chair"};
    SeededRng rng(99);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<ImageLevelLabel> ls;
      const auto n = rng.uniform_below(4);
      for (std::uint64_t k = 0; k < n; ++k) {
        const auto& id = ids[rng.uniform_below(ids.size())];
        if (rng.uniform_below(2)) {
          ls.push_back(verified("i", id, rng.uniform_below(2) == 1));
        } else {
          ls.push_back(machine("i", id, static_cast<double>(rng.uniform_below(101)) / 10.0));
        }
      }
      bool was_positive = true;
      for (double t = 0.0; t <= 10.0; t += 0.5) {
        auto spec = base;
        spec.min_confidence = t;
        const bool positive = image_level_label(ls, cs, spec).value == TriValue::positive;
        CHECK_FALSE((positive && !was_positive));
        was_positive = positive;
      }
    }
  }

  TEST_CASE("reason and value consistency table") {
    CHECK(is_consistent({TriValue::excluded, LabelReason::small_subject_only}));
    CHECK_FALSE(is_consistent({TriValue::positive, LabelReason::small_subject_only}));
    CHECK_FALSE(is_consistent({TriValue::negative, LabelReason::confident_match}));
    CHECK(is_consistent({TriValue::excluded, LabelReason::depiction_only}));
    CHECK(is_consistent({TriValue::negative, LabelReason::depiction_only}));
  }
}
