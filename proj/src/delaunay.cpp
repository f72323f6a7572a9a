#include "segmvs/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace segmvs {

namespace {

struct Tri {
  int a, b, c;     // CCW
  bool alive = true;
};

double orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

/// p strictly inside the circumcircle of CCW triangle (a, b, c).
bool in_circumcircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c,
                     const Eigen::Vector2d& p) {
  const double ax = a.x() - p.x(), ay = a.y() - p.y();
  const double bx = b.x() - p.x(), by = b.y() - p.y();
  const double cx = c.x() - p.x(), cy = c.y() - p.y();
  const double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                     (bx * bx + by * by) * (ax * cy - cx * ay) +
                     (cx * cx + cy * cy) * (ax * by - bx * ay);
  return det > 0.0;
}

struct Edge {
  int u, v;
  bool operator==(const Edge& o) const { return (u == o.u && v == o.v) || (u == o.v && v == o.u); }
};

}  // namespace

std::vector<std::array<int, 3>> triangulate_delaunay(const std::vector<Eigen::Vector2d>& points) {
  // Collapse duplicates, remembering one representative original index each.
  std::vector<int> keep;
  for (int i = 0; i < int(points.size()); ++i) {
    bool dup = false;
    for (const int j : keep)
      if ((points[size_t(i)] - points[size_t(j)]).norm() < 1e-9) {
        dup = true;
        break;
      }
    if (!dup) keep.push_back(i);
  }
  if (keep.size() < 3) return {};

  std::vector<Eigen::Vector2d> pts;
  pts.reserve(keep.size() + 3);
  for (const int i : keep) pts.push_back(points[size_t(i)]);

  Eigen::Vector2d lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double span = std::max((hi - lo).maxCoeff(), 1.0);
  const Eigen::Vector2d mid = 0.5 * (lo + hi);
  const int n = int(pts.size());
  pts.emplace_back(mid.x() - 20.0 * span, mid.y() - 10.0 * span);
  pts.emplace_back(mid.x() + 20.0 * span, mid.y() - 10.0 * span);
  pts.emplace_back(mid.x(), mid.y() + 20.0 * span);

  std::vector<Tri> tris;
  {
    int a = n, b = n + 1, c = n + 2;
    if (orient(pts[size_t(a)], pts[size_t(b)], pts[size_t(c)]) < 0.0) std::swap(b, c);
    tris.push_back({a, b, c});
  }

  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& p = pts[size_t(i)];
    std::vector<Edge> hole;
    for (Tri& t : tris) {
      if (!t.alive) continue;
      if (in_circumcircle(pts[size_t(t.a)], pts[size_t(t.b)], pts[size_t(t.c)], p)) {
        t.alive = false;
        for (const Edge e : {Edge{t.a, t.b}, Edge{t.b, t.c}, Edge{t.c, t.a}}) {
          const auto it = std::find(hole.begin(), hole.end(), e);
          if (it != hole.end())
            hole.erase(it);  // shared edge, interior to the cavity
          else
            hole.push_back(e);
        }
      }
    }
    for (const Edge& e : hole) {
      int a = e.u, b = e.v;
      if (orient(pts[size_t(a)], pts[size_t(b)], p) < 0.0) std::swap(a, b);
      if (std::abs(orient(pts[size_t(a)], pts[size_t(b)], p)) <= 0.0) continue;  // degenerate sliver
      tris.push_back({a, b, i});
    }
    std::erase_if(tris, [](const Tri& t) { return !t.alive; });
  }

  std::vector<std::array<int, 3>> out;
  for (const Tri& t : tris) {
    if (t.a >= n || t.b >= n || t.c >= n) continue;  // touches the super-triangle
    if (std::abs(orient(pts[size_t(t.a)], pts[size_t(t.b)], pts[size_t(t.c)])) < 1e-12) continue;
    out.push_back({keep[size_t(t.a)], keep[size_t(t.b)], keep[size_t(t.c)]});
  }
  return out;
}

}  // namespace segmvs
