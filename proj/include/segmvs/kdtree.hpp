#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace segmvs {

/// Small 2D KD-tree for nearest-neighbor queries over triangle centroids.
/// Ties resolve to the smallest point index.
class KdTree2d {
 public:
  KdTree2d() = default;

  explicit KdTree2d(std::vector<Eigen::Vector2d> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!order_.empty()) root_ = build(0, int(order_.size()), 0);
  }

  bool empty() const { return points_.empty(); }

  int nearest(const Eigen::Vector2d& query) const {
    if (empty()) return -1;
    int bestIdx = -1;
    double bestD2 = std::numeric_limits<double>::max();
    search(root_, query, bestIdx, bestD2);
    return bestIdx;
  }

 private:
  struct Node {
    int point = -1;
    int left = -1, right = -1;
    int axis = 0;
  };

  int build(int lo, int hi, int axis) {
    if (lo >= hi) return -1;
    const int mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi, [&](int a, int b) {
      const double va = points_[size_t(a)][axis], vb = points_[size_t(b)][axis];
      return va < vb || (va == vb && a < b);
    });
    Node node;
    node.point = order_[size_t(mid)];
    node.axis = axis;
    const int id = int(nodes_.size());
    nodes_.push_back(node);
    nodes_[size_t(id)].left = build(lo, mid, 1 - axis);
    nodes_[size_t(id)].right = build(mid + 1, hi, 1 - axis);
    return id;
  }

  void search(int nodeId, const Eigen::Vector2d& q, int& bestIdx, double& bestD2) const {
    if (nodeId < 0) return;
    const Node& node = nodes_[size_t(nodeId)];
    const Eigen::Vector2d& p = points_[size_t(node.point)];
    const double d2 = (p - q).squaredNorm();
    if (d2 < bestD2 || (d2 == bestD2 && node.point < bestIdx)) {
      bestD2 = d2;
      bestIdx = node.point;
    }
    const double diff = q[node.axis] - p[node.axis];
    search(diff <= 0.0 ? node.left : node.right, q, bestIdx, bestD2);
    if (diff * diff <= bestD2) search(diff <= 0.0 ? node.right : node.left, q, bestIdx, bestD2);
  }

  std::vector<Eigen::Vector2d> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace segmvs
