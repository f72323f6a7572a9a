#pragma once

#include "segmvs/raster.hpp"

#include <string>
#include <vector>

namespace segmvs {

struct ViewEval {
  std::string view;
  double rmse = 0.0;             // world units, over pixels valid in both maps
  double completeness1 = 0.0;    // GT pixels within 1% relative error
  double completeness2 = 0.0;
  double accuracy1 = 0.0;        // estimated pixels within 1% relative error
  double accuracy2 = 0.0;
  long gtValid = 0;
  long estValid = 0;
};

struct EvalReport {
  std::vector<ViewEval> perView;
  ViewEval total;  // pixel-pooled over views, name "all"
  double runtimeSeconds = 0.0;
  size_t peakRasterBytes = 0;
};

/// Relative depth error |est - gt| / gt against the thresholds 1% and 2%.
/// Estimated-invalid pixels count against completeness; GT-invalid pixels
/// count against accuracy.
ViewEval evaluate_depth(const std::string& name, const Rasterf& estimate, const Rasterf& groundTruth);

EvalReport evaluate_depth_maps(const std::vector<std::string>& names, const std::vector<Rasterf>& estimates,
                               const std::vector<Rasterf>& groundTruths);

/// key=value lines followed by a per-view TSV table.
std::string format_report(const EvalReport& report);

}  // namespace segmvs
