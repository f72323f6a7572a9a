#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace segmvs {

struct PlyPoint {
  Eigen::Vector3f position = Eigen::Vector3f::Zero();
  Eigen::Vector3f normal = Eigen::Vector3f::Zero();
  std::array<uint8_t, 3> color{0, 0, 0};
};

/// Binary little-endian PLY with x y z nx ny nz red green blue.
void write_ply(const std::string& path, const std::vector<PlyPoint>& points);
std::vector<PlyPoint> read_ply(const std::string& path);

}  // namespace segmvs
