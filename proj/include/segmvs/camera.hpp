#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace segmvs {

/// Pinhole camera: x = K (R X + T), pixel (u, v) with u along columns and v
/// along rows, pixel centers at integer coordinates.
struct CameraModel {
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d T = Eigen::Vector3d::Zero();
  int width = 0;
  int height = 0;
};

inline void validate_camera(const CameraModel& cam, const std::string& name) {
  if (cam.width < 2 || cam.height < 2)
    throw std::runtime_error("camera '" + name + "': image size must be at least 2x2");
  const double ortho = (cam.R.transpose() * cam.R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-6)
    throw std::runtime_error("camera '" + name + "': rotation is not orthonormal (|R'R - I| = " +
                             std::to_string(ortho) + ")");
  if (std::abs(cam.K(1, 0)) > 1e-12 || std::abs(cam.K(2, 0)) > 1e-12 || std::abs(cam.K(2, 1)) > 1e-12)
    throw std::runtime_error("camera '" + name + "': K is not upper triangular");
  if (cam.K(0, 0) <= 0.0 || cam.K(1, 1) <= 0.0)
    throw std::runtime_error("camera '" + name + "': focal entries must be positive");
}

inline Eigen::Vector3d world_to_cam(const CameraModel& cam, const Eigen::Vector3d& X) {
  return cam.R * X + cam.T;
}

inline Eigen::Vector3d cam_to_world(const CameraModel& cam, const Eigen::Vector3d& Xc) {
  return cam.R.transpose() * (Xc - cam.T);
}

/// Projects a world point; returns (u, v, depth) where depth is the camera-space z.
inline Eigen::Vector3d project(const CameraModel& cam, const Eigen::Vector3d& X) {
  const Eigen::Vector3d Xc = world_to_cam(cam, X);
  const Eigen::Vector3d h = cam.K * Xc;
  return {h.x() / h.z(), h.y() / h.z(), Xc.z()};
}

/// Back-projects pixel (u, v) at camera-space depth to a world point.
inline Eigen::Vector3d backproject(const CameraModel& cam, double u, double v, double depth) {
  const Eigen::Vector3d ray = cam.K.inverse() * Eigen::Vector3d(u, v, 1.0);
  return cam_to_world(cam, ray * (depth / ray.z()));
}

/// Unit viewing ray of pixel (u, v) in the camera frame (z forward).
inline Eigen::Vector3d view_ray(const CameraModel& cam, double u, double v) {
  return (cam.K.inverse() * Eigen::Vector3d(u, v, 1.0)).normalized();
}

/// Relative motion mapping ref-camera coordinates into src-camera coordinates.
inline void relative_motion(const CameraModel& ref, const CameraModel& src, Eigen::Matrix3d& R_rel,
                            Eigen::Vector3d& t_rel) {
  R_rel = src.R * ref.R.transpose();
  t_rel = src.T - R_rel * ref.T;
}

}  // namespace segmvs
