#pragma once

#include <filesystem>
#include <iosfwd>

#include "gin/image.hpp"

namespace gin::io {

// Binary PGM (P5), 8-bit, maxval 255, byte = round(clamp(pixel, 0, 1) * 255).
void write_pgm(std::ostream& out, const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

// Reads P5 with any maxval <= 255 (and ASCII P2); pixels become byte / maxval.
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace gin::io
