#pragma once

#include "segmvs/guidance.hpp"
#include "segmvs/raster.hpp"
#include "segmvs/rng.hpp"
#include "segmvs/synthetic.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace segmvs::test {

inline std::string temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("segmvs_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

/// Small two-plane scene; both planes textured unless requested otherwise.
inline SynthSpec small_two_plane_spec(int width, int height, int views, bool nearTextureless,
                                      int pointsFar = 60, int pointsNear = 25, uint64_t seed = 7) {
  SynthSpec spec;
  spec.width = width;
  spec.height = height;
  spec.views = views;
  spec.focal = 1.4 * width;
  spec.ringRadius = 0.25;
  spec.textureFrequency = spec.focal / 48.0;  // ~12 px noise cells at depth 4
  spec.seed = seed;
  SynthSurface far;
  far.depth = 4.0;
  far.halfWidth = 0.6 * width / spec.focal * 4.0 + 0.8;
  far.halfHeight = 0.6 * height / spec.focal * 4.0 + 0.8;
  far.textureDensity = 0.9;
  far.sparsePoints = pointsFar;
  SynthSurface near;
  near.depth = 2.0;
  near.halfWidth = 0.2 * width / spec.focal * 2.0;
  near.halfHeight = 0.2 * height / spec.focal * 2.0;
  near.textureDensity = nearTextureless ? 0.0 : 0.9;
  near.sparsePoints = pointsNear;
  spec.surfaces = {far, near};
  return spec;
}

/// Flood-fill oracle: pixels 8-connected to the center without stepping onto a
/// Discontinuous boundary pixel (the center itself always counts).
inline Rasteru8 reachable_without_strict_crossing(const OcclusionMap& occ, const Pixel& center) {
  Rasteru8 reach = Rasteru8::Zero(occ.label.rows(), occ.label.cols());
  std::vector<Pixel> stack{center};
  reach(center.row, center.col) = 1;
  while (!stack.empty()) {
    const Pixel p = stack.back();
    stack.pop_back();
    for (Index dr = -1; dr <= 1; ++dr)
      for (Index dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const Index rr = p.row + dr, cc = p.col + dc;
        if (!in_bounds(occ.label, rr, cc) || reach(rr, cc)) continue;
        if (occ.label(rr, cc) == uint8_t(EdgeLabel::Discontinuous)) continue;
        reach(rr, cc) = 1;
        stack.push_back({rr, cc});
      }
  }
  return reach;
}

/// Random segmentation from Voronoi seeds plus a step-wise mono depth per label.
struct RandomGuidance {
  Rasteru16 seg;
  Rasterf mono;
  OcclusionMap occ;
};

inline RandomGuidance random_guidance(Index rows, Index cols, int nLabels, uint64_t seed,
                                      int windowSize = 7, double delta = 1.8, int sigma = 4) {
  SplitMix64 rng(seed);
  std::vector<Pixel> seeds;
  std::vector<double> depths;
  for (int i = 0; i < nLabels; ++i) {
    seeds.push_back({Index(rng.below(uint64_t(rows))), Index(rng.below(uint64_t(cols)))});
    depths.push_back(rng.uniform(20.0, 235.0));
  }
  RandomGuidance g;
  g.seg.resize(rows, cols);
  g.mono.resize(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      int best = 0;
      Index bestD = std::numeric_limits<Index>::max();
      for (int i = 0; i < nLabels; ++i) {
        const Index d = (seeds[size_t(i)].row - r) * (seeds[size_t(i)].row - r) +
                        (seeds[size_t(i)].col - c) * (seeds[size_t(i)].col - c);
        if (d < bestD) {
          bestD = d;
          best = i;
        }
      }
      g.seg(r, c) = uint16_t(best + 1);
      g.mono(r, c) = float(depths[size_t(best)] + rng.uniform(-0.05, 0.05));
    }
  g.occ = compute_occlusion_map(extract_boundary(g.seg), g.mono, windowSize, delta, sigma);
  return g;
}

}  // namespace segmvs::test
