#pragma once

#include "segmvs/guidance.hpp"
#include "segmvs/raster.hpp"

#include <vector>

namespace segmvs {

/// Per-pixel textureness coefficient: local intensity variance over an odd
/// window, clamped at borders. Zero only on locally constant neighborhoods.
Rasterf compute_textureness(const Rasterf& image, int windowSize);

/// One diffusion ray: 8-connected Bresenham walk from the origin, stopped by a
/// Discontinuous boundary, by budget exhaustion after the first Continuous
/// crossing, by the step cap, or by the raster border.
struct Trajectory {
  Pixel origin;
  int direction = 0;
  std::vector<Pixel> pixels;  // origin first; endpoint last

  const Pixel& endpoint() const { return pixels.back(); }
  Index length() const { return Index(pixels.size()); }
};

/// Emits rayCount rays at 360/rayCount-degree spacing, counter-clockwise from
/// +x in the y-down raster convention. Each trajectory has length in
/// [1, maxRadius]. Throws if the center is outside the raster.
std::vector<Trajectory> diffuse_trajectories(const Pixel& center, int rayCount, const OcclusionMap& occ,
                                             const EdgePolicy& policy, int maxRadius, int layer);

/// Texture-aware mapping pixel m_p: the reachable pixel of minimal matching
/// ambiguity (maximal textureness) in the w x w window around p, under the
/// same edge rules as the rays. Ties prefer the pixel nearest to p, then
/// smallest (row, col).
Pixel mapping_pixel(const Rasterf& texture, const OcclusionMap& occ, const EdgePolicy& policy,
                    int windowSize, int layer, const Pixel& p);

/// Precomputed m_p for every pixel, stored as flat row-major indices.
Rasteri32 compute_mapping_field(const Rasterf& texture, const OcclusionMap& occ, const EdgePolicy& policy,
                                int windowSize, int layer);

struct PatchSample {
  Pixel pixel;  // the mapping pixel chosen for this fragment
  int trajectory = 0;
  int fragment = 0;
};

/// Number of samples allocated to a trajectory of length len given the total
/// length over rayCount trajectories: ceil(len / meanLen + 1/2), evaluated in
/// exact integer arithmetic.
int sample_count(Index len, Index totalLen, int rayCount);

/// Half-open pixel range [floor((j-1)*len/n), floor(j*len/n)) of fragment j.
std::pair<Index, Index> fragment_bounds(Index len, int fragments, int j);

/// Splits each trajectory into near-equal fragments and picks per fragment the
/// mapping pixel of minimal aggregated cost (ties: first pixel along the
/// trajectory). mappingField must cover every trajectory pixel.
std::vector<PatchSample> allocate_samples(const std::vector<Trajectory>& trajectories,
                                          const Rasterf& costField, const Rasteri32& mappingField);

/// One candidate per trajectory/diagonal pair: the pixel of minimal aggregated
/// cost over the combined trajectory, excluding the shared center unless the
/// pair is degenerate (both length 1). Ties: smallest (row, col). Requires an
/// even trajectory count.
std::vector<Pixel> propagation_candidates(const std::vector<Trajectory>& trajectories,
                                          const Rasterf& costField);

}  // namespace segmvs
