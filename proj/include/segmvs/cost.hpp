#pragma once

#include "segmvs/camera.hpp"
#include "segmvs/raster.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace segmvs {

/// PatchMatch state of one pixel: metric depth along the viewing ray's z and a
/// unit camera-facing normal in the reference camera frame.
struct Hypothesis {
  double depth = 0.0;
  Eigen::Vector3d normal = -Eigen::Vector3d::UnitZ();
};

inline bool hypothesis_valid(const Hypothesis& h, double depthMin, double depthMax,
                             const Eigen::Vector3d& viewRay) {
  return h.depth >= depthMin && h.depth <= depthMax && std::isfinite(h.depth) &&
         std::abs(h.normal.norm() - 1.0) <= 1e-6 && h.normal.dot(viewRay) < 0.0;
}

/// Precomputed pieces of the plane-induced homography between a view pair:
/// H = A + b * (n^T Kri) / (n . X0) with X0 the hypothesis point.
struct WarpContext {
  Eigen::Matrix3d A;     // K_src R_rel K_ref^-1
  Eigen::Vector3d b;     // K_src t_rel
  Eigen::Matrix3d Kri;   // K_ref^-1
  Eigen::Matrix3d Rrel;  // src.R ref.R^T
  Eigen::Vector3d trel;  // src.T - Rrel ref.T
  Eigen::Matrix3d Ks;
};

inline WarpContext make_warp_context(const CameraModel& ref, const CameraModel& src) {
  WarpContext ctx;
  relative_motion(ref, src, ctx.Rrel, ctx.trel);
  ctx.Kri = ref.K.inverse();
  ctx.A = src.K * ctx.Rrel * ctx.Kri;
  ctx.b = src.K * ctx.trel;
  ctx.Ks = src.K;
  return ctx;
}

inline Eigen::Matrix3d plane_homography(const WarpContext& ctx, double u, double v,
                                        const Hypothesis& hyp) {
  const Eigen::Vector3d ray = ctx.Kri * Eigen::Vector3d(u, v, 1.0);  // ray.z() == 1
  const Eigen::Vector3d X0 = ray * hyp.depth;
  const double planeOffset = hyp.normal.dot(X0);
  return ctx.A + ctx.b * (hyp.normal.transpose() * ctx.Kri) / planeOffset;
}

/// Sample set of a patch, flattened for the evaluation loop: coordinates, the
/// reference intensities and the bilateral weights are hypothesis-independent.
struct PatchSampleValues {
  std::vector<float> x, y;
  std::vector<float> refIntensity;
  std::vector<float> weight;

  size_t size() const { return x.size(); }
};

/// Bilateral weights: spatial sigma is half the patch's mean trajectory length,
/// intensity sigma 10 gray levels.
PatchSampleValues build_sample_values(const Rasterf& refImage, const Pixel& center,
                                      std::span<const Pixel> samplePixels, double sigmaSpatial,
                                      double sigmaIntensity);

/// 1 - bilateral-weighted NCC over the warped sample set, in [0, 2]. Samples
/// warping outside the source raster are dropped; fewer than 4 survivors or a
/// degenerate variance yields the maximal penalty 2.
double photometric_cost(const Rasterf& srcImage, const Eigen::Matrix3d& H, const PatchSampleValues& samples);

/// Truncated geometric-consistency error: project with the ref depth, look the
/// source depth up at the nearest pixel, reproject, measure the round trip.
/// Out-of-raster or invalid source depth returns tau.
double reprojection_error(const CameraModel& refCam, const CameraModel& srcCam, double u, double v,
                          double refDepth, const Rasterf& srcDepth, double tau);

/// 3x3 Laplacian filter, borders clamped.
Rasterf laplacian_filter(const Rasterf& image);

/// Truncated Laplacian-intensity difference between the ref pixel and its
/// projection (bilinear into the source Laplacian). Out-of-raster returns tau.
double color_gradient_error(const Rasterf& refLap, const Rasterf& srcLap, const Pixel& refPixel,
                            double srcX, double srcY, double tau);

/// Binary depth-difference supervision: 0 iff |dEst - dRestored| / dRestored
/// stays within mu, else 1.
inline int depth_difference_error(double dEstimate, double dRestored, double mu) {
  return std::abs(dEstimate - dRestored) / dRestored <= mu ? 0 : 1;
}

/// Uniform aggregation of matching costs across pyramid layers.
inline double multi_scale_cost(std::span<const double> layerCosts) {
  double sum = 0.0;
  for (const double c : layerCosts) sum += c;
  return layerCosts.empty() ? 0.0 : sum / double(layerCosts.size());
}

/// Normalized cost terms, all in [0, 1]: C_m / 2, E_re / tau, E_cl / tau, E_dp.
struct CostTerms {
  double matching = 0.0;
  double reprojection = 0.0;
  double colorGradient = 0.0;
  double depthDifference = 0.0;
};

inline CostTerms normalized_terms(double cm, double ere, double ecl, double edp, double tau) {
  return {cm / 2.0, ere / tau, ecl / tau, edp};
}

struct CostWeights {
  double m = 0.25, r = 0.25, c = 0.25, d = 0.25;
  double sum() const { return m + r + c + d; }
};

inline double aggregated_cost(const CostTerms& t, const CostWeights& w) {
  return w.m * t.matching + w.r * t.reprojection + w.c * t.colorGradient + w.d * t.depthDifference;
}

}  // namespace segmvs
