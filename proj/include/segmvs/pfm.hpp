#pragma once

#include "segmvs/raster.hpp"

#include <array>
#include <string>

namespace segmvs {

/// Invalid-depth marker used across all exported depth rasters.
inline constexpr float kInvalidDepth = -1.0f;

/// Little-endian PFM ("Pf"), scanlines stored bottom-up. Round trips are
/// bit-exact. Non-finite values are rejected on write; use kInvalidDepth.
void write_pfm(const std::string& path, const Rasterf& raster);
Rasterf read_pfm(const std::string& path);

/// Three-channel variant ("PF"); channels interleaved per pixel.
void write_pfm3(const std::string& path, const std::array<Rasterf, 3>& channels);
std::array<Rasterf, 3> read_pfm3(const std::string& path);

}  // namespace segmvs
