#pragma once

#include "segmvs/camera.hpp"
#include "segmvs/ply.hpp"
#include "segmvs/raster.hpp"

#include <vector>

namespace segmvs {

struct FusionView {
  Rasterf depth;                   // kInvalidDepth marks holes
  std::array<Rasterf, 3> normal;   // camera-frame unit normals
  Rasteru8 image;                  // gray intensity for point color
  CameraModel camera;
};

struct FusionParams {
  int minConsistentViews = 2;   // other views that must agree
  double relDepthTol = 0.01;    // relative depth agreement
  double reprojPxTol = 2.0;     // round-trip reprojection distance
};

/// Geometric-consistency fusion: a pixel contributes a point only if its
/// back-projected 3D point reprojects into at least minConsistentViews other
/// views with relative depth agreement within relDepthTol and round-trip
/// reprojection within reprojPxTol pixels; agreeing samples are averaged and
/// consumed.
std::vector<PlyPoint> export_point_cloud(const std::vector<FusionView>& views, const FusionParams& params);

}  // namespace segmvs
