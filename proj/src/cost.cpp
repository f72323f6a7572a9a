#include "segmvs/cost.hpp"

#include "segmvs/pfm.hpp"

#include <cmath>

namespace segmvs {

PatchSampleValues build_sample_values(const Rasterf& refImage, const Pixel& center,
                                      std::span<const Pixel> samplePixels, double sigmaSpatial,
                                      double sigmaIntensity) {
  PatchSampleValues values;
  values.x.reserve(samplePixels.size());
  values.y.reserve(samplePixels.size());
  values.refIntensity.reserve(samplePixels.size());
  values.weight.reserve(samplePixels.size());
  const double centerIntensity = double(refImage(center.row, center.col));
  const double invSp = 1.0 / (2.0 * sigmaSpatial * sigmaSpatial);
  const double invInt = 1.0 / (2.0 * sigmaIntensity * sigmaIntensity);
  for (const Pixel& p : samplePixels) {
    const double intensity = double(refImage(p.row, p.col));
    const double d2 = double((p.row - center.row) * (p.row - center.row) +
                             (p.col - center.col) * (p.col - center.col));
    const double di = intensity - centerIntensity;
    values.x.push_back(float(p.col));
    values.y.push_back(float(p.row));
    values.refIntensity.push_back(float(intensity));
    values.weight.push_back(float(std::exp(-d2 * invSp - di * di * invInt)));
  }
  return values;
}

double photometric_cost(const Rasterf& srcImage, const Eigen::Matrix3d& H, const PatchSampleValues& samples) {
  constexpr double kMaxCost = 2.0;
  const double h00 = H(0, 0), h01 = H(0, 1), h02 = H(0, 2);
  const double h10 = H(1, 0), h11 = H(1, 1), h12 = H(1, 2);
  const double h20 = H(2, 0), h21 = H(2, 1), h22 = H(2, 2);
  const double maxX = double(srcImage.cols() - 1), maxY = double(srcImage.rows() - 1);

  double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  int kept = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double u = double(samples.x[i]), v = double(samples.y[i]);
    const double wdenom = h20 * u + h21 * v + h22;
    if (std::abs(wdenom) < 1e-12) continue;
    const double su = (h00 * u + h01 * v + h02) / wdenom;
    const double sv = (h10 * u + h11 * v + h12) / wdenom;
    if (su < 0.0 || sv < 0.0 || su > maxX || sv > maxY) continue;
    const double srcVal = bilinear(srcImage, su, sv);
    const double refVal = double(samples.refIntensity[i]);
    const double w = double(samples.weight[i]);
    sw += w;
    sx += w * refVal;
    sy += w * srcVal;
    sxx += w * refVal * refVal;
    syy += w * srcVal * srcVal;
    sxy += w * refVal * srcVal;
    ++kept;
  }
  if (kept < 4 || sw <= 0.0) return kMaxCost;
  const double mx = sx / sw, my = sy / sw;
  const double vx = sxx / sw - mx * mx;
  const double vy = syy / sw - my * my;
  const double cov = sxy / sw - mx * my;
  const double denom = vx * vy;
  if (denom < 1e-10) return kMaxCost;  // textureless or constant warp: no signal
  const double ncc = std::clamp(cov / std::sqrt(denom), -1.0, 1.0);
  return 1.0 - ncc;
}

double reprojection_error(const CameraModel& refCam, const CameraModel& srcCam, double u, double v,
                          double refDepth, const Rasterf& srcDepth, double tau) {
  const Eigen::Vector3d X = backproject(refCam, u, v, refDepth);
  const Eigen::Vector3d proj = project(srcCam, X);
  if (proj.z() <= 0.0) return tau;
  const Index qr = Index(std::llround(proj.y())), qc = Index(std::llround(proj.x()));
  if (!in_bounds(srcDepth, qr, qc)) return tau;
  const double dSrc = double(srcDepth(qr, qc));
  if (!(dSrc > 0.0)) return tau;
  const Eigen::Vector3d Xsrc = backproject(srcCam, proj.x(), proj.y(), dSrc);
  const Eigen::Vector3d back = project(refCam, Xsrc);
  if (back.z() <= 0.0) return tau;
  return std::min(std::hypot(back.x() - u, back.y() - v), tau);
}

Rasterf laplacian_filter(const Rasterf& image) {
  const Index rows = image.rows(), cols = image.cols();
  Rasterf lap(rows, cols);
  auto at = [&](Index r, Index c) {
    return double(image(std::clamp<Index>(r, 0, rows - 1), std::clamp<Index>(c, 0, cols - 1)));
  };
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      lap(r, c) = float(at(r - 1, c) + at(r + 1, c) + at(r, c - 1) + at(r, c + 1) - 4.0 * at(r, c));
  return lap;
}

double color_gradient_error(const Rasterf& refLap, const Rasterf& srcLap, const Pixel& refPixel,
                            double srcX, double srcY, double tau) {
  if (!inside_bilinear(srcLap, srcX, srcY)) return tau;
  const double diff = std::abs(double(refLap(refPixel.row, refPixel.col)) - bilinear(srcLap, srcX, srcY));
  return std::min(diff, tau);
}

}  // namespace segmvs
