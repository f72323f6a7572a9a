#pragma once

#include "segmvs/camera.hpp"
#include "segmvs/raster.hpp"

#include <string>
#include <vector>

namespace segmvs {

/// One calibrated view with its auxiliary rasters. All rasters share the
/// camera's width/height. Immutable after load; safe to share across workers.
struct ViewBundle {
  std::string name;
  Rasteru8 image;         // grayscale intensity, 0..255
  Rasteru16 segmentation; // instance labels, 0 = unlabeled
  Rasterf monoDepth;      // relative monocular depth
  CameraModel camera;
};

struct Observation {
  int viewId = 0;
  double u = 0.0;
  double v = 0.0;
};

struct SparsePoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::vector<Observation> observations;
};

struct SparsePointSet {
  std::vector<SparsePoint> points;
};

struct SceneBundle {
  std::vector<ViewBundle> views;
  SparsePointSet sparse;
  double depthMin = 0.0;
  double depthMax = 0.0;
};

/// Camera-space depth of a sparse point in the given view.
inline double observation_depth(const SparsePoint& point, const CameraModel& cam) {
  return world_to_cam(cam, point.position).z();
}

/// Loads a scene directory: cameras.txt, images/<view>.png, seg/<view>.png,
/// mono/<view>.pfm, sparse/points.txt. Throws with the offending file or view
/// named on any missing file, dimension mismatch, or validation failure.
SceneBundle load_scene(const std::string& rootPath);

/// Writes a SceneBundle in the load_scene layout (plus the depth-range header).
void save_scene(const std::string& rootPath, const SceneBundle& scene);

}  // namespace segmvs
