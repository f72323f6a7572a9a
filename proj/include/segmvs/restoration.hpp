#pragma once

#include "segmvs/raster.hpp"
#include "segmvs/scene.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <vector>

namespace segmvs {

/// One triangle of an instance cluster with its plane classification.
struct ClusterTriangle {
  std::array<int, 3> vertices{};     // indices into the cluster's member arrays
  std::vector<Pixel> coveredPixels;  // raster pixels inside the triangle with the cluster's label
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  bool planar = false;
  double inlierRatio = 0.0;
  Eigen::Vector3d monoPlane = Eigen::Vector3d::Zero();   // D ~ a*u + b*v + c (normalized mono)
  Eigen::Vector3d depthPlane = Eigen::Vector3d::Zero();  // d = a*u + b*v + c through vertex depths
};

/// Sparse observations of one view grouped by the segmentation label at their
/// pixel, with the group's Delaunay triangles.
struct InstanceCluster {
  uint16_t label = 0;
  std::vector<Eigen::Vector2d> pixels;  // observation pixel coordinates (u, v)
  std::vector<double> depths;           // camera-space depths
  std::vector<ClusterTriangle> triangles;
};

enum class DepthProvenance : uint8_t {
  Invalid = 0,
  TriangleInterp = 1,
  PlaneProject = 2,
  GeomRefined = 3,
  ProportionalMap = 4,
};

struct RestoredDepthMap {
  Rasterf depth;          // kInvalidDepth where tag == Invalid
  Raster<uint8_t> tag;    // DepthProvenance values
};

struct RestorationParams {
  double gamma = 5e-3;  // RANSAC residual threshold on [0,1]-normalized mono depth
  double kappa = 0.7;   // planar inlier-ratio threshold
  int ransacIterations = 1000;
  uint64_t seed = 7;
};

/// Groups this view's observations by instance label and triangulates each
/// group; groups with fewer than 3 non-collinear members carry no triangles.
std::vector<InstanceCluster> cluster_and_triangulate(const ViewBundle& view, const SparsePointSet& sparse,
                                                     int viewId);

/// Inverse-distance interpolation over a triangle's vertices (depth weights
/// 1/l_vp). p must lie inside or on the triangle; a vertex hit (< 1e-9 px)
/// returns that vertex's depth exactly.
double interpolate_triangle_depth(const Eigen::Vector2d& p, const std::array<Eigen::Vector2d, 3>& vertices,
                                  const std::array<double, 3>& depths);

struct TriangleClassification {
  bool planar = false;
  double inlierRatio = 0.0;
  Eigen::Vector3d plane = Eigen::Vector3d::Zero();
};

/// RANSAC plane fit of the normalized mono depth over the triangle's covered
/// pixels; Planar iff the inlier ratio exceeds kappa. Fewer than 3 pixels
/// classify NonPlanar with ratio 0.
TriangleClassification classify_triangle(const std::vector<Pixel>& coveredPixels, const Rasterf& monoNorm,
                                         const RestorationParams& params, uint64_t triangleSeed);

/// Full routing: planar triangles keep inverse-distance depths, non-planar
/// triangles reweight by mono-depth differences, outside pixels go through the
/// nearest planar triangle (plane projection when the mono residual stays
/// below gamma, proportional mapping otherwise), and triangle-free instances
/// fall back to observation interpolation.
RestoredDepthMap refine_depth(const std::vector<InstanceCluster>& clusters, const Rasterf& monoNorm,
                              const ViewBundle& view, const RestorationParams& params);

/// cluster_and_triangulate + classify_triangle + refine_depth with the mono
/// depth min-max normalized to [0, 1]. Deterministic for a fixed seed.
RestoredDepthMap restore(const ViewBundle& view, const SparsePointSet& sparse, int viewId,
                         const RestorationParams& params);

/// Inclusive point-in-triangle (edges and vertices count as inside).
bool point_in_triangle(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const Eigen::Vector2d& c);

}  // namespace segmvs
