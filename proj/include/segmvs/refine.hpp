#pragma once

#include "segmvs/cost.hpp"
#include "segmvs/rng.hpp"

#include <functional>
#include <utility>

namespace segmvs {

struct RefineResult {
  Hypothesis hypothesis;
  double cost = 0.0;
  bool improved = false;
};

/// Spherical gradient refinement: the normal moves in (theta, phi) descent
/// steps whose step size halves after a failed round (3 rounds), and the depth
/// is perturbed uniformly within the pixel's search interval. The result is
/// never worse than the input; ties keep the incumbent.
RefineResult spherical_gradient_refine(const Hypothesis& start,
                                       const std::function<double(const Hypothesis&)>& costFn,
                                       std::pair<double, double> depthInterval,
                                       const Eigen::Vector3d& viewRay, double depthMin, double depthMax,
                                       SplitMix64& rng, int rounds = 3, double initialStep = M_PI / 16.0);

}  // namespace segmvs
