#include "segmvs/deformation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace segmvs {

Rasterf compute_textureness(const Rasterf& image, int windowSize) {
  if (windowSize % 2 == 0 || windowSize < 3)
    throw std::invalid_argument("compute_textureness: window size must be odd and >= 3");
  const Index rows = image.rows(), cols = image.cols();
  const Index radius = windowSize / 2;

  // Integral images of I and I^2 (exact in double for 8-bit-scale intensities).
  Eigen::ArrayXXd sum = Eigen::ArrayXXd::Zero(rows + 1, cols + 1);
  Eigen::ArrayXXd sumSq = Eigen::ArrayXXd::Zero(rows + 1, cols + 1);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      const double v = double(image(r, c));
      sum(r + 1, c + 1) = v + sum(r, c + 1) + sum(r + 1, c) - sum(r, c);
      sumSq(r + 1, c + 1) = v * v + sumSq(r, c + 1) + sumSq(r + 1, c) - sumSq(r, c);
    }

  Rasterf t(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const Index r0 = std::max<Index>(0, r - radius), r1 = std::min<Index>(rows - 1, r + radius);
      const Index c0 = std::max<Index>(0, c - radius), c1 = std::min<Index>(cols - 1, c + radius);
      const double n = double((r1 - r0 + 1) * (c1 - c0 + 1));
      const double s = sum(r1 + 1, c1 + 1) - sum(r0, c1 + 1) - sum(r1 + 1, c0) + sum(r0, c0);
      const double sq = sumSq(r1 + 1, c1 + 1) - sumSq(r0, c1 + 1) - sumSq(r1 + 1, c0) + sumSq(r0, c0);
      t(r, c) = float(std::max(0.0, sq / n - (s / n) * (s / n)));
    }
  }
  return t;
}

namespace {

struct RayWalker {
  Index x, y;
  Index dx, dy, sx, sy, err;

  RayWalker(const Pixel& origin, double angle, int span) {
    x = origin.col;
    y = origin.row;
    // y-down raster: counter-clockwise angles move toward negative rows.
    const Index tx = origin.col + Index(std::lround(span * std::cos(angle)));
    const Index ty = origin.row - Index(std::lround(span * std::sin(angle)));
    dx = std::abs(tx - x);
    dy = std::abs(ty - y);
    sx = tx >= x ? 1 : -1;
    sy = ty >= y ? 1 : -1;
    err = dx - dy;
  }

  Pixel next() {
    const Index e2 = 2 * err;
    if (e2 > -dy) {
      err -= dy;
      x += sx;
    }
    if (e2 < dx) {
      err += dx;
      y += sy;
    }
    return {y, x};
  }
};

}  // namespace

std::vector<Trajectory> diffuse_trajectories(const Pixel& center, int rayCount, const OcclusionMap& occ,
                                             const EdgePolicy& policy, int maxRadius, int layer) {
  if (!in_bounds(occ.label, center))
    throw std::invalid_argument("diffuse_trajectories: center outside raster");
  if (rayCount < 4) throw std::invalid_argument("diffuse_trajectories: need at least 4 rays");
  if (maxRadius < 1) throw std::invalid_argument("diffuse_trajectories: maxRadius must be >= 1");

  std::vector<Trajectory> trajectories;
  trajectories.reserve(size_t(rayCount));
  for (int i = 0; i < rayCount; ++i) {
    Trajectory traj;
    traj.origin = center;
    traj.direction = i;
    traj.pixels.reserve(size_t(maxRadius));
    traj.pixels.push_back(center);

    RayWalker walker(center, 2.0 * M_PI * i / rayCount, 4 * maxRadius + 4);
    bool budgetStarted = false;
    int remaining = 0;
    while (Index(traj.pixels.size()) < maxRadius) {
      const Pixel next = walker.next();
      if (!in_bounds(occ.label, next)) break;
      const EdgeLabel lab = occ.at(next.row, next.col);
      if (lab == EdgeLabel::Discontinuous) break;
      if (budgetStarted) {
        if (remaining == 0) break;
        --remaining;
      } else if (lab == EdgeLabel::Continuous) {
        // Budget of epsilon further pixels beyond this first crossing.
        budgetStarted = true;
        remaining = policy.epsilon(layer);
      }
      traj.pixels.push_back(next);
    }
    trajectories.push_back(std::move(traj));
  }
  return trajectories;
}

namespace {

constexpr int kPreCrossing = std::numeric_limits<int>::max();

/// Budget-aware reachability over the window: state is "not crossed yet" or
/// the remaining budget; higher states dominate.
void window_reachability(const OcclusionMap& occ, const EdgePolicy& policy, int layer, const Pixel& p,
                         Index radius, std::vector<int>& states) {
  const Index side = 2 * radius + 1;
  states.assign(size_t(side * side), -1);
  auto idx = [&](Index r, Index c) { return size_t((r - p.row + radius) * side + (c - p.col + radius)); };
  auto inWindow = [&](Index r, Index c) {
    return std::abs(r - p.row) <= radius && std::abs(c - p.col) <= radius && in_bounds(occ.label, r, c);
  };

  states[idx(p.row, p.col)] = kPreCrossing;
  std::vector<Pixel> queue{p};
  while (!queue.empty()) {
    const Pixel cur = queue.back();
    queue.pop_back();
    const int s = states[idx(cur.row, cur.col)];
    for (Index dr = -1; dr <= 1; ++dr)
      for (Index dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const Index rr = cur.row + dr, cc = cur.col + dc;
        if (!inWindow(rr, cc)) continue;
        const EdgeLabel lab = occ.at(rr, cc);
        if (lab == EdgeLabel::Discontinuous) continue;
        int ns;
        if (s == kPreCrossing)
          ns = lab == EdgeLabel::Continuous ? policy.epsilon(layer) : kPreCrossing;
        else if (s == 0)
          continue;
        else
          ns = s - 1;
        if (ns > states[idx(rr, cc)]) {
          states[idx(rr, cc)] = ns;
          queue.push_back({rr, cc});
        }
      }
  }
}

struct MappingBest {
  float value = -std::numeric_limits<float>::infinity();
  Index dist2 = std::numeric_limits<Index>::max();
  Pixel pixel{-1, -1};

  // Most clearly textured reachable pixel; ties prefer nearest, then (row, col).
  void consider(float v, Index d2, const Pixel& q) {
    if (v > value || (v == value && (d2 < dist2 || (d2 == dist2 && q < pixel)))) {
      value = v;
      dist2 = d2;
      pixel = q;
    }
  }
};

Pixel mapping_window_argmin(const Rasterf& texture, const Pixel& p, Index radius,
                            const std::vector<int>* states) {
  const Index side = 2 * radius + 1;
  MappingBest best;
  for (Index rr = std::max<Index>(0, p.row - radius); rr <= std::min(texture.rows() - 1, p.row + radius);
       ++rr)
    for (Index cc = std::max<Index>(0, p.col - radius); cc <= std::min(texture.cols() - 1, p.col + radius);
         ++cc) {
      if (states) {
        const size_t i = size_t((rr - p.row + radius) * side + (cc - p.col + radius));
        if ((*states)[i] < 0) continue;
      }
      const Index d2 = (rr - p.row) * (rr - p.row) + (cc - p.col) * (cc - p.col);
      best.consider(texture(rr, cc), d2, {rr, cc});
    }
  return best.pixel;
}

}  // namespace

Pixel mapping_pixel(const Rasterf& texture, const OcclusionMap& occ, const EdgePolicy& policy,
                    int windowSize, int layer, const Pixel& p) {
  if (windowSize % 2 == 0 || windowSize < 3)
    throw std::invalid_argument("mapping_pixel: window size must be odd and >= 3");
  const Index radius = windowSize / 2;
  std::vector<int> states;
  window_reachability(occ, policy, layer, p, radius, states);
  return mapping_window_argmin(texture, p, radius, &states);
}

Rasteri32 compute_mapping_field(const Rasterf& texture, const OcclusionMap& occ, const EdgePolicy& policy,
                                int windowSize, int layer) {
  const Index rows = texture.rows(), cols = texture.cols();
  const Index radius = windowSize / 2;

  // Windows without boundary pixels skip the reachability walk.
  Eigen::ArrayXXi boundaryCount = Eigen::ArrayXXi::Zero(rows + 1, cols + 1);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      boundaryCount(r + 1, c + 1) = int(occ.label(r, c) != uint8_t(EdgeLabel::None)) +
                                    boundaryCount(r, c + 1) + boundaryCount(r + 1, c) - boundaryCount(r, c);

  Rasteri32 field(rows, cols);
  std::vector<int> states;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const Index r0 = std::max<Index>(0, r - radius), r1 = std::min<Index>(rows - 1, r + radius);
      const Index c0 = std::max<Index>(0, c - radius), c1 = std::min<Index>(cols - 1, c + radius);
      const int nBoundary = boundaryCount(r1 + 1, c1 + 1) - boundaryCount(r0, c1 + 1) -
                            boundaryCount(r1 + 1, c0) + boundaryCount(r0, c0);
      Pixel m;
      if (nBoundary == 0) {
        m = mapping_window_argmin(texture, {r, c}, radius, nullptr);
      } else {
        window_reachability(occ, policy, layer, {r, c}, radius, states);
        m = mapping_window_argmin(texture, {r, c}, radius, &states);
      }
      field(r, c) = int32_t(m.row * cols + m.col);
    }
  }
  return field;
}

int sample_count(Index len, Index totalLen, int rayCount) {
  // ceil(len / mean + 1/2) with mean = totalLen / rayCount, in exact integers.
  const Index num = 2 * len * rayCount + totalLen;
  const Index den = 2 * totalLen;
  return int((num + den - 1) / den);
}

std::pair<Index, Index> fragment_bounds(Index len, int fragments, int j) {
  return {Index(j - 1) * len / fragments, Index(j) * len / fragments};
}

std::vector<PatchSample> allocate_samples(const std::vector<Trajectory>& trajectories,
                                          const Rasterf& costField, const Rasteri32& mappingField) {
  if (trajectories.empty()) throw std::invalid_argument("allocate_samples: no trajectories");
  Index totalLen = 0;
  for (const Trajectory& t : trajectories) totalLen += t.length();
  const int rayCount = int(trajectories.size());
  const Index cols = costField.cols();

  std::vector<PatchSample> samples;
  samples.reserve(size_t(2 * rayCount));
  for (int i = 0; i < rayCount; ++i) {
    const Trajectory& traj = trajectories[size_t(i)];
    const int n = sample_count(traj.length(), totalLen, rayCount);
    for (int j = 1; j <= n; ++j) {
      const auto [lo, hi] = fragment_bounds(traj.length(), n, j);
      if (lo >= hi) continue;  // sub-unit fragment of a length-1 trajectory
      float bestCost = std::numeric_limits<float>::infinity();
      Pixel bestPixel;
      for (Index k = lo; k < hi; ++k) {
        const Pixel& p = traj.pixels[size_t(k)];
        const int32_t flat = mappingField(p.row, p.col);
        const Pixel m{Index(flat) / cols, Index(flat) % cols};
        const float cost = costField(m.row, m.col);
        if (cost < bestCost) {  // ties keep the fragment's first pixel
          bestCost = cost;
          bestPixel = m;
        }
      }
      samples.push_back({bestPixel, i, j});
    }
  }
  return samples;
}

std::vector<Pixel> propagation_candidates(const std::vector<Trajectory>& trajectories,
                                          const Rasterf& costField) {
  const int rayCount = int(trajectories.size());
  if (rayCount % 2 != 0)
    throw std::invalid_argument("propagation_candidates: trajectory count must be even");
  std::vector<Pixel> candidates;
  candidates.reserve(size_t(rayCount / 2));
  for (int i = 0; i < rayCount / 2; ++i) {
    const Trajectory& a = trajectories[size_t(i)];
    const Trajectory& b = trajectories[size_t(i + rayCount / 2)];
    float bestCost = std::numeric_limits<float>::infinity();
    Pixel bestPixel{-1, -1};
    auto scan = [&](const Trajectory& t) {
      for (size_t k = 1; k < t.pixels.size(); ++k) {  // skip the shared center
        const Pixel& p = t.pixels[k];
        const float cost = costField(p.row, p.col);
        if (cost < bestCost || (cost == bestCost && p < bestPixel)) {
          bestCost = cost;
          bestPixel = p;
        }
      }
    };
    scan(a);
    scan(b);
    if (bestPixel.row < 0) bestPixel = a.origin;  // degenerate length-1 pair
    candidates.push_back(bestPixel);
  }
  return candidates;
}

}  // namespace segmvs
