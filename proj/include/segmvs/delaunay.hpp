#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

namespace segmvs {

/// 2D Delaunay triangulation (Bowyer-Watson). Points coincident within 1e-9 are
/// collapsed onto the first occurrence; collinear input yields no triangles.
/// Returned triples index into the input array, vertices in CCW order.
std::vector<std::array<int, 3>> triangulate_delaunay(const std::vector<Eigen::Vector2d>& points);

}  // namespace segmvs
