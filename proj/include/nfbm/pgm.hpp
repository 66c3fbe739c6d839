#pragma once

#include <string>

#include "nfbm/imaging.hpp"

namespace nfbm {

/// Reads a plain (P2) or binary (P5) 8-bit PGM file.
Image read_pgm(const std::string& path);

/// Writes an 8-bit PGM with maxval 255. Values are rounded to nearest and
/// clamped to [0, 255] on write.
void write_pgm(const std::string& path, const Image& img, bool binary = true);

}  // namespace nfbm
