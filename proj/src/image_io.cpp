#include <png.h>

#include <cctype>
#include <fstream>
#include <memory>

#include "wakegen/bench_synth.hpp"
#include "wakegen/error.hpp"

namespace wakegen {

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(std::istream& in) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

std::size_t ppm_number(std::istream& in, const char* what) {
  const std::string token = ppm_token(in);
  if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos ||
      token.size() > 9) {
    throw Error(std::string("PPM: bad ") + what + " '" + token + "'");
  }
  return std::stoul(token);
}

}  // namespace

RgbImage read_ppm(std::istream& in) {
  if (ppm_token(in) != "P6") throw Error("PPM: expected binary P6 magic");
  RgbImage img;
  img.width = ppm_number(in, "width");
  img.height = ppm_number(in, "height");
  const std::size_t maxval = ppm_number(in, "maxval");
  if (maxval == 0 || maxval > 255) throw Error("PPM: only 8-bit maxval is supported");
  // ppm_token consumed exactly one whitespace byte after maxval.
  img.pixels.resize(img.width * img.height * 3);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.pixels.size()) {
    throw Error("PPM: truncated pixel data");
  }
  if (maxval != 255) {
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>((p * 255u + maxval / 2) / maxval);
  }
  return img;
}

void write_ppm(std::ostream& out, RgbImageView image) {
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
}

RgbImage read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw Error("PNG " + path.string() + ": " + png.message);
  }
  std::unique_ptr<png_image, void (*)(png_imagep)> guard(&png, png_image_free);
  png.format = PNG_FORMAT_RGB;
  RgbImage img;
  img.width = png.width;
  img.height = png.height;
  img.pixels.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
    throw Error("PNG " + path.string() + ": " + png.message);
  }
  return img;
}

RgbImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open image " + path.string());
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (in.gcount() >= 2 && magic[0] == 'P' && magic[1] == '6') {
    in.clear();
    in.seekg(0);
    return read_ppm(in);
  }
  static const unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (in.gcount() == 8 && std::equal(magic, magic + 8, reinterpret_cast<const char*>(kPngMagic))) {
    in.close();
    return read_png(path);
  }
  throw Error("unsupported image format (need PPM P6 or PNG): " + path.string());
}

}  // namespace wakegen
