#include "segmvs/fusion.hpp"

#include "segmvs/pfm.hpp"

#include <cmath>

namespace segmvs {

std::vector<PlyPoint> export_point_cloud(const std::vector<FusionView>& views, const FusionParams& params) {
  std::vector<PlyPoint> cloud;
  std::vector<Rasteru8> used;
  used.reserve(views.size());
  for (const FusionView& v : views) used.push_back(Rasteru8::Zero(v.depth.rows(), v.depth.cols()));

  struct Agreement {
    size_t view;
    Pixel pixel;
    Eigen::Vector3d position;
    Eigen::Vector3d normal;
  };

  for (size_t vi = 0; vi < views.size(); ++vi) {
    const FusionView& ref = views[vi];
    for (Index r = 0; r < ref.depth.rows(); ++r) {
      for (Index c = 0; c < ref.depth.cols(); ++c) {
        if (used[vi](r, c)) continue;
        const double d = double(ref.depth(r, c));
        if (!(d > 0.0)) continue;
        const Eigen::Vector3d X = backproject(ref.camera, double(c), double(r), d);
        const Eigen::Vector3d nWorld =
            ref.camera.R.transpose() * Eigen::Vector3d(double(ref.normal[0](r, c)),
                                                       double(ref.normal[1](r, c)),
                                                       double(ref.normal[2](r, c)));

        std::vector<Agreement> agreeing;
        for (size_t vj = 0; vj < views.size(); ++vj) {
          if (vj == vi) continue;
          const FusionView& src = views[vj];
          const Eigen::Vector3d proj = project(src.camera, X);
          if (proj.z() <= 0.0) continue;
          const Index qr = Index(std::llround(proj.y())), qc = Index(std::llround(proj.x()));
          if (!in_bounds(src.depth, qr, qc) || used[vj](qr, qc)) continue;
          const double dSrc = double(src.depth(qr, qc));
          if (!(dSrc > 0.0)) continue;
          if (std::abs(proj.z() - dSrc) / dSrc > params.relDepthTol) continue;
          const Eigen::Vector3d Xsrc = backproject(src.camera, proj.x(), proj.y(), dSrc);
          const Eigen::Vector3d back = project(ref.camera, Xsrc);
          if (back.z() <= 0.0) continue;
          if (std::hypot(back.x() - double(c), back.y() - double(r)) > params.reprojPxTol) continue;
          const Eigen::Vector3d nSrc =
              src.camera.R.transpose() * Eigen::Vector3d(double(src.normal[0](qr, qc)),
                                                         double(src.normal[1](qr, qc)),
                                                         double(src.normal[2](qr, qc)));
          agreeing.push_back({vj, {qr, qc}, Xsrc, nSrc});
        }

        if (int(agreeing.size()) < params.minConsistentViews) continue;

        Eigen::Vector3d position = X;
        Eigen::Vector3d normal = nWorld;
        for (const Agreement& a : agreeing) {
          position += a.position;
          normal += a.normal;
        }
        position /= double(agreeing.size() + 1);
        if (normal.norm() > 1e-12) normal.normalize();

        PlyPoint point;
        point.position = position.cast<float>();
        point.normal = normal.cast<float>();
        const uint8_t gray = ref.image.size() > 0 ? ref.image(r, c) : uint8_t(255);
        point.color = {gray, gray, gray};
        cloud.push_back(point);

        used[vi](r, c) = 1;
        for (const Agreement& a : agreeing) used[a.view](a.pixel.row, a.pixel.col) = 1;
      }
    }
  }
  return cloud;
}

}  // namespace segmvs
