#include "segmvs/guidance.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace segmvs {

Rasteru8 extract_boundary(const Rasteru16& seg) {
  Rasteru8 boundary = Rasteru8::Zero(seg.rows(), seg.cols());
  for (Index r = 0; r < seg.rows(); ++r) {
    for (Index c = 0; c < seg.cols(); ++c) {
      const uint16_t label = seg(r, c);
      const bool edge = (r > 0 && seg(r - 1, c) != label) || (r + 1 < seg.rows() && seg(r + 1, c) != label) ||
                        (c > 0 && seg(r, c - 1) != label) || (c + 1 < seg.cols() && seg(r, c + 1) != label);
      boundary(r, c) = edge ? 1 : 0;
    }
  }
  return boundary;
}

Rasterf sobel_magnitude(const Rasterf& raster) {
  const Index rows = raster.rows(), cols = raster.cols();
  Rasterf mag(rows, cols);
  auto at = [&](Index r, Index c) {
    return double(raster(std::clamp<Index>(r, 0, rows - 1), std::clamp<Index>(c, 0, cols - 1)));
  };
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const double gx = -at(r - 1, c - 1) + at(r - 1, c + 1) - 2.0 * at(r, c - 1) + 2.0 * at(r, c + 1) -
                        at(r + 1, c - 1) + at(r + 1, c + 1);
      const double gy = -at(r - 1, c - 1) - 2.0 * at(r - 1, c) - at(r - 1, c + 1) + at(r + 1, c - 1) +
                        2.0 * at(r + 1, c) + at(r + 1, c + 1);
      mag(r, c) = float(std::sqrt(gx * gx + gy * gy));
    }
  }
  return mag;
}

Rasterf normalize_range(const Rasterf& raster, double hi) {
  const float lo = raster.minCoeff(), top = raster.maxCoeff();
  if (double(top) - double(lo) < 1e-12) return Rasterf::Zero(raster.rows(), raster.cols());
  return ((raster - lo) * float(hi / (double(top) - double(lo)))).eval();
}

namespace {

struct ClusterSet {
  std::vector<int> parent;
  std::vector<int> size;

  int find(int a) {
    while (parent[size_t(a)] != a) {
      parent[size_t(a)] = parent[size_t(parent[size_t(a)])];
      a = parent[size_t(a)];
    }
    return a;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[size_t(a)] < size[size_t(b)]) std::swap(a, b);
    parent[size_t(b)] = a;
    size[size_t(a)] += size[size_t(b)];
  }
};

/// 8-connected components of same-label boundary pixels.
Rasteri32 label_clusters(const Rasteru8& boundary, const Raster<uint8_t>& label,
                         std::vector<std::vector<Pixel>>& members) {
  Rasteri32 cluster = Rasteri32::Constant(boundary.rows(), boundary.cols(), -1);
  members.clear();
  for (Index r = 0; r < boundary.rows(); ++r) {
    for (Index c = 0; c < boundary.cols(); ++c) {
      if (!boundary(r, c) || cluster(r, c) >= 0) continue;
      const int id = int(members.size());
      members.emplace_back();
      std::vector<Pixel> stack{{r, c}};
      cluster(r, c) = id;
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        members.back().push_back(p);
        for (Index dr = -1; dr <= 1; ++dr)
          for (Index dc = -1; dc <= 1; ++dc) {
            const Index rr = p.row + dr, cc = p.col + dc;
            if ((dr == 0 && dc == 0) || !in_bounds(boundary, rr, cc)) continue;
            if (boundary(rr, cc) && cluster(rr, cc) < 0 && label(rr, cc) == label(p.row, p.col)) {
              cluster(rr, cc) = id;
              stack.push_back({rr, cc});
            }
          }
      }
    }
  }
  return cluster;
}

}  // namespace

OcclusionMap compute_occlusion_map(const Rasteru8& boundary, const Rasterf& monoDepth, int windowSize,
                                   double delta, int sigma) {
  if (windowSize % 2 == 0 || windowSize < 3)
    throw std::invalid_argument("compute_occlusion_map: window size must be odd and >= 3");
  if (boundary.rows() != monoDepth.rows() || boundary.cols() != monoDepth.cols())
    throw std::invalid_argument("compute_occlusion_map: raster dimensions differ");

  const Index rows = boundary.rows(), cols = boundary.cols();
  const Index radius = windowSize / 2;
  const Rasterf grad = sobel_magnitude(monoDepth);

  OcclusionMap occ;
  occ.label = Raster<uint8_t>::Zero(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      if (!boundary(r, c)) continue;
      const Index r0 = std::max<Index>(0, r - radius), r1 = std::min<Index>(rows - 1, r + radius);
      const Index c0 = std::max<Index>(0, c - radius), c1 = std::min<Index>(cols - 1, c + radius);
      const float gmax = grad.block(r0, c0, r1 - r0 + 1, c1 - c0 + 1).maxCoeff();
      occ.label(r, c) = uint8_t(double(gmax) < delta ? EdgeLabel::Continuous : EdgeLabel::Discontinuous);
    }
  }

  // Noise reassignment: flip clusters below sigma, largest first, but only when
  // they merge into an adjacent opposite-label cluster that is itself >= sigma
  // (flipping into another undersized cluster would just move the violation).
  std::vector<std::vector<Pixel>> members;
  Rasteri32 cluster = label_clusters(boundary, occ.label, members);
  ClusterSet set;
  set.parent.resize(members.size());
  std::iota(set.parent.begin(), set.parent.end(), 0);
  set.size.resize(members.size());
  for (size_t i = 0; i < members.size(); ++i) set.size[i] = int(members[i].size());

  std::vector<int> order(members.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (members[size_t(a)].size() != members[size_t(b)].size())
      return members[size_t(a)].size() > members[size_t(b)].size();
    return members[size_t(a)].front() < members[size_t(b)].front();
  });

  for (const int id : order) {
    const int root = set.find(id);
    if (set.size[size_t(root)] >= sigma) continue;
    // Collect pixels of the current merged cluster.
    std::vector<Pixel> pixels;
    for (size_t j = 0; j < members.size(); ++j)
      if (set.find(int(j)) == root) pixels.insert(pixels.end(), members[j].begin(), members[j].end());
    const uint8_t myLabel = occ.label(pixels.front().row, pixels.front().col);
    const uint8_t opposite = myLabel == uint8_t(EdgeLabel::Continuous) ? uint8_t(EdgeLabel::Discontinuous)
                                                                       : uint8_t(EdgeLabel::Continuous);
    int bestNeighbor = 0;
    for (const Pixel& p : pixels)
      for (Index dr = -1; dr <= 1; ++dr)
        for (Index dc = -1; dc <= 1; ++dc) {
          const Index rr = p.row + dr, cc = p.col + dc;
          if ((dr == 0 && dc == 0) || !in_bounds(boundary, rr, cc)) continue;
          if (boundary(rr, cc) && occ.label(rr, cc) == opposite)
            bestNeighbor = std::max(bestNeighbor, set.size[size_t(set.find(cluster(rr, cc)))]);
        }
    if (bestNeighbor < sigma) continue;
    for (const Pixel& p : pixels) occ.label(p.row, p.col) = opposite;
    for (const Pixel& p : pixels)
      for (Index dr = -1; dr <= 1; ++dr)
        for (Index dc = -1; dc <= 1; ++dc) {
          const Index rr = p.row + dr, cc = p.col + dc;
          if ((dr == 0 && dc == 0) || !in_bounds(boundary, rr, cc)) continue;
          if (boundary(rr, cc) && occ.label(rr, cc) == opposite) set.unite(root, cluster(rr, cc));
        }
  }

  occ.cluster = label_clusters(boundary, occ.label, members);
  return occ;
}

Crossing crossing_allowance(const EdgePolicy& policy, const OcclusionMap& occ, const Pixel& from,
                            const Pixel& to, int layer) {
  if (!adjacent8(from, to))
    throw std::invalid_argument("crossing_allowance: pixels are not 8-adjacent");
  if (!in_bounds(occ.label, to)) return {CrossKind::Blocked, 0};
  switch (occ.at(to.row, to.col)) {
    case EdgeLabel::Discontinuous:
      return {CrossKind::Blocked, 0};
    case EdgeLabel::Continuous:
      return {CrossKind::AllowedWithinBudget, policy.epsilon(layer)};
    case EdgeLabel::None:
    default:
      return {CrossKind::Allowed, 0};
  }
}

}  // namespace segmvs
