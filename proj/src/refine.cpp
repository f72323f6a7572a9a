#include "segmvs/refine.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace segmvs {

namespace {

void to_spherical(const Eigen::Vector3d& n, double& theta, double& phi) {
  theta = std::acos(std::clamp(n.z(), -1.0, 1.0));
  phi = std::atan2(n.y(), n.x());
}

Eigen::Vector3d from_spherical(double theta, double phi) {
  const double st = std::sin(theta);
  return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

}  // namespace

RefineResult spherical_gradient_refine(const Hypothesis& start,
                                       const std::function<double(const Hypothesis&)>& costFn,
                                       std::pair<double, double> depthInterval,
                                       const Eigen::Vector3d& viewRay, double depthMin, double depthMax,
                                       SplitMix64& rng, int rounds, double initialStep) {
  RefineResult best{start, costFn(start), false};

  const double lo = std::max(depthInterval.first, depthMin);
  const double hi = std::min(depthInterval.second, depthMax);
  double stepTheta = initialStep, stepPhi = initialStep;

  for (int round = 0; round < rounds; ++round) {
    double theta = 0.0, phi = 0.0;
    to_spherical(best.hypothesis.normal, theta, phi);

    std::vector<Hypothesis> candidates;
    for (const double t : {theta - stepTheta, theta + stepTheta})
      candidates.push_back({best.hypothesis.depth, from_spherical(t, phi)});
    for (const double p : {phi - stepPhi, phi + stepPhi})
      candidates.push_back({best.hypothesis.depth, from_spherical(theta, p)});
    for (int k = 0; k < 2; ++k) {
      const double d = lo < hi ? rng.uniform(lo, hi) : best.hypothesis.depth;
      candidates.push_back({d, best.hypothesis.normal});
    }

    bool roundImproved = false;
    for (const Hypothesis& cand : candidates) {
      if (!hypothesis_valid(cand, depthMin, depthMax, viewRay)) continue;
      const double cost = costFn(cand);
      if (cost < best.cost) {
        best = {cand, cost, true};
        roundImproved = true;
      }
    }
    if (!roundImproved) {
      stepTheta *= 0.5;
      stepPhi *= 0.5;
    }
  }
  return best;
}

}  // namespace segmvs
