#include "segmvs/restoration.hpp"

#include "segmvs/delaunay.hpp"
#include "segmvs/guidance.hpp"
#include "segmvs/kdtree.hpp"
#include "segmvs/pfm.hpp"
#include "segmvs/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace segmvs {

bool point_in_triangle(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const Eigen::Vector2d& c) {
  auto side = [](const Eigen::Vector2d& u, const Eigen::Vector2d& v, const Eigen::Vector2d& q) {
    return (v.x() - u.x()) * (q.y() - u.y()) - (v.y() - u.y()) * (q.x() - u.x());
  };
  const double eps = 1e-9;
  const double d1 = side(a, b, p), d2 = side(b, c, p), d3 = side(c, a, p);
  const bool hasNeg = d1 < -eps || d2 < -eps || d3 < -eps;
  const bool hasPos = d1 > eps || d2 > eps || d3 > eps;
  return !(hasNeg && hasPos);
}

std::vector<InstanceCluster> cluster_and_triangulate(const ViewBundle& view, const SparsePointSet& sparse,
                                                     int viewId) {
  std::map<uint16_t, InstanceCluster> byLabel;
  for (const SparsePoint& point : sparse.points) {
    for (const Observation& obs : point.observations) {
      if (obs.viewId != viewId) continue;
      const Index row = std::clamp<Index>(Index(std::llround(obs.v)), 0, view.segmentation.rows() - 1);
      const Index col = std::clamp<Index>(Index(std::llround(obs.u)), 0, view.segmentation.cols() - 1);
      const uint16_t label = view.segmentation(row, col);
      InstanceCluster& cluster = byLabel[label];
      cluster.label = label;
      cluster.pixels.emplace_back(obs.u, obs.v);
      cluster.depths.push_back(observation_depth(point, view.camera));
    }
  }

  std::vector<InstanceCluster> clusters;
  for (auto& [label, cluster] : byLabel) {
    for (const auto& tri : triangulate_delaunay(cluster.pixels)) {
      ClusterTriangle t;
      t.vertices = tri;
      t.centroid = (cluster.pixels[size_t(tri[0])] + cluster.pixels[size_t(tri[1])] +
                    cluster.pixels[size_t(tri[2])]) /
                   3.0;
      cluster.triangles.push_back(std::move(t));
    }
    clusters.push_back(std::move(cluster));
  }
  return clusters;
}

double interpolate_triangle_depth(const Eigen::Vector2d& p, const std::array<Eigen::Vector2d, 3>& vertices,
                                  const std::array<double, 3>& depths) {
  if (!point_in_triangle(p, vertices[0], vertices[1], vertices[2]))
    throw std::invalid_argument("interpolate_triangle_depth: pixel outside triangle");
  double num = 0.0, den = 0.0;
  for (int v = 0; v < 3; ++v) {
    const double dist = (vertices[size_t(v)] - p).norm();
    if (dist < 1e-9) return depths[size_t(v)];
    num += depths[size_t(v)] / dist;
    den += 1.0 / dist;
  }
  return num / den;
}

TriangleClassification classify_triangle(const std::vector<Pixel>& coveredPixels, const Rasterf& monoNorm,
                                         const RestorationParams& params, uint64_t triangleSeed) {
  TriangleClassification result;
  if (coveredPixels.size() < 3) return result;  // degenerate: NonPlanar, ratio 0

  SplitMix64 rng(triangleSeed);
  const size_t n = coveredPixels.size();
  size_t bestInliers = 0;
  Eigen::Vector3d bestPlane = Eigen::Vector3d::Zero();

  auto residual = [&](const Eigen::Vector3d& plane, const Pixel& p) {
    return std::abs(plane.x() * double(p.col) + plane.y() * double(p.row) + plane.z() -
                    double(monoNorm(p.row, p.col)));
  };

  for (int iter = 0; iter < params.ransacIterations && bestInliers < n; ++iter) {
    const size_t i0 = size_t(rng.below(n)), i1 = size_t(rng.below(n)), i2 = size_t(rng.below(n));
    if (i0 == i1 || i0 == i2 || i1 == i2) continue;
    Eigen::Matrix3d A;
    Eigen::Vector3d z;
    for (int k = 0; k < 3; ++k) {
      const Pixel& p = coveredPixels[k == 0 ? i0 : (k == 1 ? i1 : i2)];
      A.row(k) << double(p.col), double(p.row), 1.0;
      z(k) = double(monoNorm(p.row, p.col));
    }
    if (std::abs(A.determinant()) < 1e-9) continue;  // collinear sample
    const Eigen::Vector3d plane = A.fullPivLu().solve(z);
    size_t inliers = 0;
    for (const Pixel& p : coveredPixels)
      if (residual(plane, p) <= params.gamma) ++inliers;
    if (inliers > bestInliers) {
      bestInliers = inliers;
      bestPlane = plane;
    }
  }

  result.inlierRatio = double(bestInliers) / double(n);
  result.plane = bestPlane;
  result.planar = result.inlierRatio > params.kappa;
  return result;
}

namespace {

Eigen::Vector3d plane_through(const std::array<Eigen::Vector2d, 3>& verts, const std::array<double, 3>& z) {
  Eigen::Matrix3d A;
  for (int k = 0; k < 3; ++k) A.row(k) << verts[size_t(k)].x(), verts[size_t(k)].y(), 1.0;
  if (std::abs(A.determinant()) < 1e-12) {
    // Degenerate footprint: fall back to the mean depth as a constant plane.
    return {0.0, 0.0, (z[0] + z[1] + z[2]) / 3.0};
  }
  return A.fullPivLu().solve(Eigen::Vector3d(z[0], z[1], z[2]));
}

double eval_plane(const Eigen::Vector3d& plane, double u, double v) {
  return plane.x() * u + plane.y() * v + plane.z();
}

/// Nearest covered pixel of a triangle to p (Euclidean, ties lexicographic).
Pixel nearest_covered_pixel(const ClusterTriangle& tri, const Pixel& p) {
  Pixel best = tri.coveredPixels.front();
  Index bestD2 = std::numeric_limits<Index>::max();
  for (const Pixel& q : tri.coveredPixels) {
    const Index d2 = (q.row - p.row) * (q.row - p.row) + (q.col - p.col) * (q.col - p.col);
    if (d2 < bestD2 || (d2 == bestD2 && q < best)) {
      bestD2 = d2;
      best = q;
    }
  }
  return best;
}

}  // namespace

RestoredDepthMap refine_depth(const std::vector<InstanceCluster>& clusters, const Rasterf& monoNorm,
                              const ViewBundle& view, const RestorationParams& params) {
  const Index rows = view.segmentation.rows(), cols = view.segmentation.cols();
  RestoredDepthMap out;
  out.depth = Rasterf::Constant(rows, cols, kInvalidDepth);
  out.tag = Raster<uint8_t>::Zero(rows, cols);

  auto setDepth = [&](Index r, Index c, double d, DepthProvenance tag, double fallback) {
    if (!(d > 0.0) || !std::isfinite(d)) d = fallback;
    if (!(d > 0.0) || !std::isfinite(d)) return;
    out.depth(r, c) = float(d);
    out.tag(r, c) = uint8_t(tag);
  };

  for (const InstanceCluster& cluster : clusters) {
    // Usable triangles cover at least one pixel (needed for proportional
    // mapping's nearest in-triangle pixel).
    std::vector<int> usable, planarIdx;
    std::vector<Eigen::Vector2d> usableCentroids, planarCentroids;
    for (int t = 0; t < int(cluster.triangles.size()); ++t) {
      const ClusterTriangle& tri = cluster.triangles[size_t(t)];
      if (tri.coveredPixels.empty()) continue;
      usable.push_back(t);
      usableCentroids.push_back(tri.centroid);
      if (tri.planar) {
        planarIdx.push_back(t);
        planarCentroids.push_back(tri.centroid);
      }
    }

    // Inside-triangle pixels: Eq.-style inverse-distance weighting, either by
    // pixel distance (planar) or by mono-depth difference (non-planar).
    for (const int t : usable) {
      const ClusterTriangle& tri = cluster.triangles[size_t(t)];
      const std::array<Eigen::Vector2d, 3> verts{cluster.pixels[size_t(tri.vertices[0])],
                                                 cluster.pixels[size_t(tri.vertices[1])],
                                                 cluster.pixels[size_t(tri.vertices[2])]};
      const std::array<double, 3> depths{cluster.depths[size_t(tri.vertices[0])],
                                         cluster.depths[size_t(tri.vertices[1])],
                                         cluster.depths[size_t(tri.vertices[2])]};
      for (const Pixel& p : tri.coveredPixels) {
        if (out.tag(p.row, p.col) != uint8_t(DepthProvenance::Invalid)) continue;  // first triangle wins
        const Eigen::Vector2d uv(double(p.col), double(p.row));
        if (tri.planar) {
          setDepth(p.row, p.col, interpolate_triangle_depth(uv, verts, depths),
                   DepthProvenance::TriangleInterp, depths[0]);
        } else {
          const double Dp = double(monoNorm(p.row, p.col));
          double num = 0.0, den = 0.0;
          double exact = -1.0;
          for (int v = 0; v < 3; ++v) {
            const Index vr = std::clamp<Index>(Index(std::llround(verts[size_t(v)].y())), 0, rows - 1);
            const Index vc = std::clamp<Index>(Index(std::llround(verts[size_t(v)].x())), 0, cols - 1);
            const double diff = std::abs(double(monoNorm(vr, vc)) - Dp);
            if (diff < 1e-9 && exact < 0.0) exact = depths[size_t(v)];
            num += depths[size_t(v)] / std::max(diff, 1e-12);
            den += 1.0 / std::max(diff, 1e-12);
          }
          setDepth(p.row, p.col, exact > 0.0 ? exact : num / den, DepthProvenance::GeomRefined, depths[0]);
        }
      }
    }

    if (usable.empty()) {
      // Triangle-free instance: interpolate the observations directly.
      if (cluster.pixels.empty()) continue;
      for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) {
          if (view.segmentation(r, c) != cluster.label) continue;
          double num = 0.0, den = 0.0;
          double exact = -1.0;
          for (size_t v = 0; v < cluster.pixels.size(); ++v) {
            const double dist = (cluster.pixels[v] - Eigen::Vector2d(double(c), double(r))).norm();
            if (dist < 1e-9 && exact < 0.0) exact = cluster.depths[v];
            num += cluster.depths[v] / std::max(dist, 1e-12);
            den += 1.0 / std::max(dist, 1e-12);
          }
          setDepth(r, c, exact > 0.0 ? exact : num / den, DepthProvenance::PlaneProject,
                   cluster.depths.front());
        }
      continue;
    }

    const KdTree2d planarTree(planarCentroids);
    const KdTree2d usableTree(usableCentroids);

    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) {
        if (view.segmentation(r, c) != cluster.label) continue;
        if (out.tag(r, c) != uint8_t(DepthProvenance::Invalid)) continue;
        const Eigen::Vector2d uv{double(c), double(r)};
        const double Dp = double(monoNorm(r, c));

        if (!planarTree.empty()) {
          const int triIdx = planarIdx[size_t(planarTree.nearest(uv))];
          const ClusterTriangle& tri = cluster.triangles[size_t(triIdx)];
          const double monoResidual = std::abs(eval_plane(tri.monoPlane, uv.x(), uv.y()) - Dp);
          if (monoResidual < params.gamma) {
            // Textureless reading: project onto the triangle's depth plane.
            const Pixel q = nearest_covered_pixel(tri, {r, c});
            setDepth(r, c, eval_plane(tri.depthPlane, uv.x(), uv.y()), DepthProvenance::PlaneProject,
                     double(out.depth(q.row, q.col)));
            continue;
          }
          const Pixel q = nearest_covered_pixel(tri, {r, c});
          const double dq = double(out.depth(q.row, q.col));
          const double Dq = double(monoNorm(q.row, q.col));
          setDepth(r, c, Dq < 1e-9 ? dq : dq * Dp / Dq, DepthProvenance::ProportionalMap, dq);
          continue;
        }

        // No planar triangle in this instance: proportional mapping through
        // the nearest usable triangle.
        const ClusterTriangle& tri = cluster.triangles[size_t(usable[size_t(usableTree.nearest(uv))])];
        const Pixel q = nearest_covered_pixel(tri, {r, c});
        const double dq = double(out.depth(q.row, q.col));
        const double Dq = double(monoNorm(q.row, q.col));
        setDepth(r, c, Dq < 1e-9 ? dq : dq * Dp / Dq, DepthProvenance::ProportionalMap, dq);
      }
    }
  }
  return out;
}

RestoredDepthMap restore(const ViewBundle& view, const SparsePointSet& sparse, int viewId,
                         const RestorationParams& params) {
  const Rasterf monoNorm = normalize_range(view.monoDepth, 1.0);
  std::vector<InstanceCluster> clusters = cluster_and_triangulate(view, sparse, viewId);

  for (InstanceCluster& cluster : clusters) {
    for (size_t t = 0; t < cluster.triangles.size(); ++t) {
      ClusterTriangle& tri = cluster.triangles[t];
      const std::array<Eigen::Vector2d, 3> verts{cluster.pixels[size_t(tri.vertices[0])],
                                                 cluster.pixels[size_t(tri.vertices[1])],
                                                 cluster.pixels[size_t(tri.vertices[2])]};
      // Rasterize: pixels inside the triangle that carry the cluster's label.
      const Index r0 = std::max<Index>(0, Index(std::floor(std::min({verts[0].y(), verts[1].y(), verts[2].y()}))));
      const Index r1 = std::min<Index>(view.segmentation.rows() - 1,
                                       Index(std::ceil(std::max({verts[0].y(), verts[1].y(), verts[2].y()}))));
      const Index c0 = std::max<Index>(0, Index(std::floor(std::min({verts[0].x(), verts[1].x(), verts[2].x()}))));
      const Index c1 = std::min<Index>(view.segmentation.cols() - 1,
                                       Index(std::ceil(std::max({verts[0].x(), verts[1].x(), verts[2].x()}))));
      for (Index r = r0; r <= r1; ++r)
        for (Index c = c0; c <= c1; ++c) {
          if (view.segmentation(r, c) != cluster.label) continue;
          if (point_in_triangle({double(c), double(r)}, verts[0], verts[1], verts[2]))
            tri.coveredPixels.push_back({r, c});
        }

      const TriangleClassification cls =
          classify_triangle(tri.coveredPixels, monoNorm, params,
                            hash_mix(params.seed, uint64_t(cluster.label), t));
      tri.planar = cls.planar;
      tri.inlierRatio = cls.inlierRatio;
      tri.monoPlane = cls.plane;
      tri.depthPlane = plane_through(verts, {cluster.depths[size_t(tri.vertices[0])],
                                             cluster.depths[size_t(tri.vertices[1])],
                                             cluster.depths[size_t(tri.vertices[2])]});
    }
  }

  return refine_depth(clusters, monoNorm, view, params);
}

}  // namespace segmvs
