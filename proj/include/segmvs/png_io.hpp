#pragma once

#include "segmvs/raster.hpp"

#include <array>
#include <string>

namespace segmvs {

void write_png_gray8(const std::string& path, const Rasteru8& raster);
Rasteru8 read_png_gray8(const std::string& path);

/// 16-bit single-channel PNG; used for instance-label rasters (ID 0 = unlabeled).
void write_png_gray16(const std::string& path, const Rasteru16& raster);
Rasteru16 read_png_gray16(const std::string& path);

/// 8-bit RGB PNG; used for debug overlays (occlusion maps, patch visualizations).
void write_png_rgb8(const std::string& path, const std::array<Rasteru8, 3>& rgb);
std::array<Rasteru8, 3> read_png_rgb8(const std::string& path);

}  // namespace segmvs
