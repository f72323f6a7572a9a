#pragma once

#include "segmvs/scene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace segmvs {

/// Axis-aligned rectangle in the plane z = depth (world units).
struct SynthSurface {
  double depth = 1.0;
  double centerX = 0.0;
  double centerY = 0.0;
  double halfWidth = 1.0;
  double halfHeight = 1.0;
  double textureDensity = 1.0;  // 0 renders a constant (textureless) surface
  int sparsePoints = -1;        // -1: share of the global texture-weighted pool
};

enum class MonoMode { Affine, PerInstanceAffine };

/// Piecewise-planar scene rendered from a pure-translation camera ring (all
/// optical axes along +z), so per-view ground-truth depth is constant on each
/// surface.
struct SynthSpec {
  int width = 640;
  int height = 480;
  int views = 5;
  double focal = 700.0;
  double ringRadius = 0.35;
  std::vector<SynthSurface> surfaces;
  MonoMode monoMode = MonoMode::Affine;
  double monoA = 0.5;  // D = monoA * gtDepth + monoB
  double monoB = 1.0;
  int globalSparsePoints = 0;
  double textureFrequency = 14.0;  // noise cells per world unit
  uint64_t seed = 7;
};

struct SyntheticScene {
  SceneBundle scene;
  std::vector<Rasterf> gtDepth;  // per view; kInvalidDepth where no surface is hit
};

SyntheticScene generate_synthetic_scene(const SynthSpec& spec);

/// key=value synth spec (surface fields as surfaceN.key); see README.
SynthSpec parse_synth_spec(const std::string& path);

/// The canonical 5-view 640x480 two-plane scene with a fully textureless near
/// plane and sparse coverage on both planes.
SynthSpec two_plane_preset();

}  // namespace segmvs
