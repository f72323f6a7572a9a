#pragma once

#include "segmvs/raster.hpp"

#include <cstdint>

namespace segmvs {

/// Boundary map: a pixel is boundary iff at least one 4-neighbor inside the
/// raster carries a different segmentation label. Image borders alone are not
/// boundary.
Rasteru8 extract_boundary(const Rasteru16& segmentation);

enum class EdgeLabel : uint8_t { None = 0, Continuous = 1, Discontinuous = 2 };

/// Per-boundary-pixel continuity classification plus the 8-connected
/// same-label cluster id of each boundary pixel (-1 off the boundary).
struct OcclusionMap {
  Raster<uint8_t> label;  // EdgeLabel values
  Rasteri32 cluster;

  EdgeLabel at(Index row, Index col) const { return EdgeLabel(label(row, col)); }
};

/// 3x3 Sobel gradient magnitude, borders clamped (replicated), no mirroring.
Rasterf sobel_magnitude(const Rasterf& raster);

/// Min-max normalization to [0, hi]; constant rasters map to all zeros.
Rasterf normalize_range(const Rasterf& raster, double hi);

/// Classifies every boundary pixel from the monocular-depth gradient: take the
/// maximum Sobel magnitude over the (clamped) w x w window, Continuous iff it
/// stays below delta, then flip 8-connected clusters smaller than sigma to the
/// opposite label when they merge into a neighbor of at least sigma pixels.
/// monoDepth must already be normalized (delta is calibrated for [0, 255]).
OcclusionMap compute_occlusion_map(const Rasteru8& boundary, const Rasterf& monoDepth, int windowSize,
                                   double delta, int sigma);

struct EdgePolicy {
  int epsilonBase = 8;
  /// Crossing budget at pyramid layer n.
  int epsilon(int layer) const { return epsilonBase << layer; }
};

enum class CrossKind : uint8_t { Blocked, Allowed, AllowedWithinBudget };

struct Crossing {
  CrossKind kind = CrossKind::Allowed;
  int budget = 0;  // set when kind == AllowedWithinBudget
};

/// Single-step rule for 8-adjacent pixels: stepping onto a Discontinuous
/// boundary pixel blocks; stepping onto a Continuous boundary pixel starts the
/// caller's per-trajectory budget of epsilon(layer) further steps; everything
/// else is free. Throws if the pixels are not 8-adjacent.
Crossing crossing_allowance(const EdgePolicy& policy, const OcclusionMap& occ, const Pixel& from,
                            const Pixel& to, int layer);

}  // namespace segmvs
