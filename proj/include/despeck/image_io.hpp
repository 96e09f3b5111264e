#pragma once

#include <string>

#include "despeck/image.hpp"

namespace despeck {

// Reads a PGM (binary "P5" or ASCII "P2", maxval <= 255) or raw-float "NLR1"
// image. 8-bit samples are promoted to 64-bit reals on read.
IntensityImage read_image(const std::string& path);

// 8-bit binary PGM; samples are rounded and clamped to [0, 255].
void write_pgm(const std::string& path, const IntensityImage& img);

// Lossless raw-float format: one ASCII header line "NLR1 <width> <height>\n"
// followed by width*height little-endian IEEE-754 doubles, row-major.
void write_nlr1(const std::string& path, const IntensityImage& img);

} // namespace despeck
