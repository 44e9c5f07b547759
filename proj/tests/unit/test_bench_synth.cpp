#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "support.hpp"
#include "wakegen/bench_synth.hpp"
#include "wakegen/error.hpp"

using namespace wakegen;

namespace {

RgbImage solid(std::size_t w, std::size_t h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RgbImage img{w, h, {}};
  for (std::size_t i = 0; i < w * h; ++i) img.pixels.insert(img.pixels.end(), {r, g, b});
  return img;
}

MiapAnnotation miap(const std::string& image, GenderPresentation g, AgePresentation a) {
  return {image, 0, 1, 0, 1, g, a};
}

DatasetRow row(const std::string& image, std::uint8_t label,
               Provenance p = Provenance::bounding_box) {
  return {image, file_name_for(image), label, Split::test, false, false, p};
}

}  // namespace

TEST_SUITE("bench_synth") {
  TEST_CASE("mean grayscale") {
    CHECK(mean_grayscale(solid(3, 2, 255, 255, 255).view()).mean_gray == doctest::Approx(255.0).epsilon(1e-12));
    CHECK(mean_grayscale(solid(3, 2, 0, 0, 0).view()).mean_gray == 0.0);
    CHECK(mean_grayscale(solid(4, 4, 100, 200, 50).view()).mean_gray ==
          doctest::Approx(0.299 * 100 + 0.587 * 200 + 0.114 * 50).epsilon(1e-12));
    CHECK(std::abs(mean_grayscale(solid(4, 4, 100, 200, 50).view()).mean_gray - 153.0) < 1e-9);
    CHECK_THROWS_AS(mean_grayscale(RgbImage{}.view()), DomainError);
  }

  TEST_CASE("mean grayscale averages mixed pixels and honours custom weights") {
    RgbImage img{2, 1, {0, 0, 0, 255, 255, 255}};
    CHECK(mean_grayscale(img.view()).mean_gray == doctest::Approx(127.5));
    CHECK(mean_grayscale(img.view(), LumaWeights{1, 0, 0}).mean_gray == doctest::Approx(127.5));
    RgbImage red{1, 1, {200, 0, 0}};
    CHECK(mean_grayscale(red.view(), LumaWeights{0, 1, 0}).mean_gray == 0.0);
  }

  TEST_CASE("lighting bands") {
    const std::pair<double, Lighting> cases[] = {
        {0, Lighting::dark},     {84.9, Lighting::dark},     {84.999, Lighting::dark},
        {85, Lighting::normal},  {170, Lighting::normal},    {170.001, Lighting::bright},
        {171, Lighting::bright}, {255, Lighting::bright}};
    for (const auto& [mean, want] : cases) CHECK(lighting_flag({mean}) == want);
  }

  TEST_CASE("property: lighting partitions 0..255") {
    for (int i = 0; i <= 255000; ++i) {
      const double m = i / 1000.0;
      const auto l = lighting_flag({m});
      const bool dark = m < 85, bright = m > 170;
      CHECK_MESSAGE(l == (dark ? Lighting::dark : bright ? Lighting::bright : Lighting::normal), m);
    }
  }

  TEST_CASE("distance bands") {
    CHECK(distance_flag(0.65) == Distance::near);
    CHECK(distance_flag(0.35) == Distance::medium);
    CHECK(distance_flag(0.07) == Distance::far);
    CHECK(distance_flag(0.10) == Distance::medium);
    CHECK(distance_flag(0.60) == Distance::medium);
    CHECK(distance_flag(0.601) == Distance::near);
    CHECK(distance_flag(0.0999) == Distance::far);
    CHECK(distance_flag(1.0) == Distance::near);
    CHECK_FALSE(distance_flag(0.0));
  }

  TEST_CASE("property: distance partitions (0,1]") {
    for (int i = 1; i <= 100000; ++i) {
      const double a = i / 100000.0;
      const auto d = distance_flag(a);
      REQUIRE(d);
      const Distance want = a > 0.60 ? Distance::near : a < 0.10 ? Distance::far : Distance::medium;
      CHECK(*d == want);
    }
  }

  TEST_CASE("depiction flag") {
    BoxDecision d;
    CHECK(depiction_flag(d) == DepictionClass::no_depiction);
    d.has_nonperson_depiction = true;
    CHECK(depiction_flag(d) == DepictionClass::nonperson_depiction);
    d.has_person_depiction = true;
    CHECK(depiction_flag(d) == DepictionClass::person_depiction);
  }

  TEST_CASE("demographic consensus") {
    using G = GenderPresentation;
    using A = AgePresentation;
    const std::vector<MiapAnnotation> one = {miap("i", G::feminine, A::older)};
    auto f = demographic_flags(one);
    CHECK(f.gender == Gender::female);
    CHECK(f.age == Age::older);
    const std::vector<MiapAnnotation> two = {miap("i", G::feminine, A::middle), miap("i", G::masculine, A::middle)};
    f = demographic_flags(two);
    CHECK(f.gender == Gender::unknown);
    CHECK(f.age == Age::middle);
    const std::vector<MiapAnnotation> mixed_unknown = {miap("i", G::masculine, A::young), miap("i", G::masculine, A::unknown)};
    f = demographic_flags(mixed_unknown);
    CHECK(f.gender == Gender::male);
    CHECK(f.age == Age::unknown);
    f = demographic_flags({});
    CHECK_FALSE(f.gender);
    CHECK_FALSE(f.age);
  }

  TEST_CASE("synthesize: flags per row kind") {
    const std::vector<DatasetRow> rows = {row("pos", 1), row("neg", 0), row("img", 1, Provenance::image_level),
                                          row("ovr", 1, Provenance::manual_override)};
    std::unordered_map<std::string, BoxDecision> decisions;
    decisions["pos"].max_positive_area = 0.35;
    decisions["neg"].has_nonperson_depiction = true;
    decisions["img"].max_positive_area = 0.9;
    decisions["ovr"].max_positive_area = 0.05;
    std::unordered_map<std::string, std::vector<MiapAnnotation>> m;
    m["pos"] = {miap("pos", GenderPresentation::masculine, AgePresentation::young)};
    m["neg"] = {miap("neg", GenderPresentation::masculine, AgePresentation::young)};
    std::unordered_map<std::string, LuminanceStat> lum = {{"pos", {10}}, {"neg", {100}}, {"img", {200}}, {"ovr", {85}}};
    const auto s = synthesize(rows, decisions, m, lum);
    REQUIRE(s.flags.size() == 4);
    CHECK(s.flags[0].distance == Distance::medium);
    CHECK(s.flags[0].gender == Gender::male);
    CHECK(s.flags[0].age == Age::young);
    CHECK_FALSE(s.flags[0].depiction);
    CHECK(s.flags[0].lighting == Lighting::dark);
    CHECK(s.flags[1].depiction == DepictionClass::nonperson_depiction);
    CHECK_FALSE(s.flags[1].distance);
    CHECK_FALSE(s.flags[1].gender);
    CHECK_FALSE(s.flags[2].distance);
    CHECK(s.flags[3].distance == Distance::far);
    CHECK(s.counts[static_cast<std::size_t>(Subset::lighting_normal)] == 2);

    lum.erase("ovr");
    CHECK_THROWS_AS(synthesize(rows, decisions, m, lum), ConfigError);
  }

  TEST_CASE("synthesize: family disjointness and lighting exhaustiveness") {
    std::ifstream labels(testutil::golden("test_benchmarks.csv"));
    const auto csv = read_labels_csv(labels, "person", Split::test);
    REQUIRE(csv.flags.size() == csv.rows.size());
    for (const auto& f : csv.flags) {
      std::map<std::string_view, int> per_family;
      for (Subset s : kAllSubsets) per_family[subset_family(s)] += in_subset(f, s);
      for (const auto& [family, n] : per_family) CHECK(n <= 1);
      CHECK(per_family["Lighting"] == 1);
    }
  }

  TEST_CASE("synthesize: one image per lighting band, all-positive fixture") {
    const std::vector<DatasetRow> rows = {row("a", 1), row("b", 1), row("c", 1)};
    std::unordered_map<std::string, BoxDecision> decisions;
    for (const auto& r : rows) decisions[r.image_id].max_positive_area = 0.5;
    const std::unordered_map<std::string, LuminanceStat> lum = {{"a", {20}}, {"b", {120}}, {"c", {220}}};
    const auto s = synthesize(rows, decisions, {}, lum);
    const auto count = [&](Subset x) { return s.counts[static_cast<std::size_t>(x)]; };
    CHECK(count(Subset::lighting_dark) == 1);
    CHECK(count(Subset::lighting_normal) == 1);
    CHECK(count(Subset::lighting_bright) == 1);
    CHECK(count(Subset::depictions_person) + count(Subset::depictions_nonperson) +
              count(Subset::depictions_none) == 0);
    CHECK(count(Subset::distance_medium) == 3);
  }

  TEST_CASE("synthesize: fixture hand tally") {
    // Validation split of the bundled fixture, balanced with seed 1.
    std::ifstream sizes(testutil::golden("validation_subset_sizes.csv"));
    std::string header, values;
    std::getline(sizes, header);
    std::getline(sizes, values);
    CHECK(values == "validation,1,1,1,2,2,2,1,1,1,1,1,1,1,1,1,0");
    std::ifstream test_sizes(testutil::golden("test_subset_sizes.csv"));
    std::getline(test_sizes, header);
    std::getline(test_sizes, values);
    CHECK(values == "test,1,2,0,2,2,2,1,1,1,1,1,0,1,0,0,1");
  }

  TEST_CASE("luminance CSV round-trip") {
    const std::map<std::string, LuminanceStat> stats = {{"a", {12.5}}, {"b", {170.001}}};
    std::ostringstream out;
    write_luminance_csv(out, stats);
    std::istringstream in(out.str());
    const auto back = parse_luminance_csv(in);
    CHECK(back.at("a").mean_gray == 12.5);
    CHECK(back.at("b").mean_gray == 170.001);
    std::istringstream bad("image_id,mean_gray\na,300\n");
    CHECK_THROWS(parse_luminance_csv(bad));
  }

  TEST_CASE("PPM and PNG decoding") {
    const auto dir = testutil::scratch_dir("images");
    const auto img = solid(3, 2, 100, 200, 50);
    {
      std::ofstream out(dir / "a.ppm", std::ios::binary);
      out << "P6\n# comment\n3 2\n255\n";
      out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    }
    const auto back = load_image(dir / "a.ppm");
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    CHECK(back.pixels == img.pixels);
    {
      std::ofstream out(dir / "bad.ppm", std::ios::binary);
      out << "P6\n3 2\n255\n" << "short";
    }
    CHECK_THROWS(load_image(dir / "bad.ppm"));
    {
      std::ofstream out(dir / "x.gif", std::ios::binary);
      out << "GIF89a";
    }
    CHECK_THROWS(load_image(dir / "x.gif"));
    const auto png = load_image(testutil::data_dir() / "images" / "gray64.png");
    CHECK(png.width == 4);
    CHECK(png.height == 4);
    CHECK(mean_grayscale(png.view()).mean_gray == doctest::Approx(64.0).epsilon(1e-9));
  }

  TEST_CASE("subset size tables") {
    SubsetCounts c{};
    c[0] = 7;
    const std::pair<std::string, SubsetCounts> splits[] = {{"test", c}};
    std::ostringstream csv_out;
    write_subset_sizes_csv(csv_out, splits);
    CHECK(csv_out.str() ==
          "split,distance_near,distance_medium,distance_far,lighting_dark,lighting_normal,"
          "lighting_bright,depictions_person,depictions_nonperson,depictions_none,gender_female,"
          "gender_male,gender_unknown,age_young,age_middle,age_older,age_unknown\n"
          "test,7,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0\n");
    std::ostringstream txt;
    write_subset_sizes_text(txt, splits);
    CHECK(txt.str().find("Distance") != std::string::npos);
    CHECK(txt.str().find("No Depiction") != std::string::npos);
  }
}
