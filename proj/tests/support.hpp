#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wakegen/oi_ingest.hpp"

namespace testutil {

inline std::filesystem::path data_dir() { return WAKEGEN_TEST_DATA; }
inline std::filesystem::path fixture(const std::string& name) { return data_dir() / "fixture" / name; }
inline std::filesystem::path golden(const std::string& name) { return data_dir() / "golden" / name; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("wakegen_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline wakegen::BoxAnnotation box(const std::string& image, const std::string& label, double x0,
                                  double x1, double y0, double y1, bool depiction = false,
                                  bool group = false) {
  return {image, label, x0, x1, y0, y1, depiction, group, false};
}

// Full-width box of the given area fraction.
inline wakegen::BoxAnnotation area_box(const std::string& image, const std::string& label,
                                       double area, bool depiction = false) {
  return box(image, label, 0.0, 1.0, 0.0, area, depiction);
}

inline wakegen::ImageLevelLabel machine(const std::string& image, const std::string& label,
                                        double confidence) {
  return {image, label, wakegen::LabelSource::machine_generated, confidence};
}

inline wakegen::ImageLevelLabel verified(const std::string& image, const std::string& label,
                                         bool present) {
  return {image, label, wakegen::LabelSource::human_verified, present ? 10.0 : 0.0};
}

}  // namespace testutil
