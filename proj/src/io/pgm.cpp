#include "gin/io/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace gin::io {

void write_pgm(std::ostream& out, const GrayImage& image) {
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  std::string bytes(image.pixels.size(), '\0');
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const double v = std::clamp(static_cast<double>(image.pixels[i]), 0.0, 1.0);
    bytes[i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  write_pgm(out, image);
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      if (!token.empty()) break;
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

std::size_t header_number(std::istream& in, const char* what) {
  const std::string t = next_token(in);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
    throw FormatError(std::string("PGM header: bad ") + what + " '" + t + "'");
  }
  return std::stoul(t);
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
  const std::string magic = next_token(in);
  if (magic != "P5" && magic != "P2") throw FormatError("not a PGM file (magic '" + magic + "')");
  const std::size_t width = header_number(in, "width");
  const std::size_t height = header_number(in, "height");
  const std::size_t maxval = header_number(in, "maxval");
  if (width == 0 || height == 0) throw FormatError("PGM with zero dimension");
  if (maxval == 0 || maxval > 255) throw FormatError("PGM maxval must be in [1, 255], got " + std::to_string(maxval));

  GrayImage img(height, width);
  const double scale = 1.0 / static_cast<double>(maxval);
  if (magic == "P5") {
    std::string bytes(width * height, '\0');
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) throw FormatError("truncated PGM pixel data");
    for (std::size_t i = 0; i < bytes.size(); ++i) {
      const auto b = static_cast<unsigned char>(bytes[i]);
      if (b > maxval) throw FormatError("PGM sample exceeds maxval");
      img.pixels[i] = static_cast<float>(b * scale);
    }
  } else {
    for (float& p : img.pixels) {
      const std::size_t v = header_number(in, "sample");
      if (v > maxval) throw FormatError("PGM sample exceeds maxval");
      p = static_cast<float>(static_cast<double>(v) * scale);
    }
  }
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  try {
    return read_pgm(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace gin::io
