#include "segmvs/eval.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace segmvs {

namespace {

struct Tally {
  double sqErr = 0.0;
  long both = 0;
  long gtValid = 0;
  long estValid = 0;
  long within1 = 0;
  long within2 = 0;

  void add(float est, float gt) {
    const bool g = gt > 0.0f, e = est > 0.0f;
    gtValid += g;
    estValid += e;
    if (!g || !e) return;
    ++both;
    const double err = std::abs(double(est) - double(gt));
    sqErr += err * err;
    const double rel = err / double(gt);
    within1 += rel <= 0.01;
    within2 += rel <= 0.02;
  }

  ViewEval finish(const std::string& name) const {
    ViewEval out;
    out.view = name;
    out.rmse = both > 0 ? std::sqrt(sqErr / double(both)) : 0.0;
    out.completeness1 = gtValid > 0 ? double(within1) / double(gtValid) : 0.0;
    out.completeness2 = gtValid > 0 ? double(within2) / double(gtValid) : 0.0;
    out.accuracy1 = estValid > 0 ? double(within1) / double(estValid) : 0.0;
    out.accuracy2 = estValid > 0 ? double(within2) / double(estValid) : 0.0;
    out.gtValid = gtValid;
    out.estValid = estValid;
    return out;
  }
};

}  // namespace

ViewEval evaluate_depth(const std::string& name, const Rasterf& estimate, const Rasterf& groundTruth) {
  if (estimate.rows() != groundTruth.rows() || estimate.cols() != groundTruth.cols())
    throw std::runtime_error("evaluate_depth: dimensions of '" + name + "' do not match ground truth");
  Tally tally;
  for (Index r = 0; r < estimate.rows(); ++r)
    for (Index c = 0; c < estimate.cols(); ++c) tally.add(estimate(r, c), groundTruth(r, c));
  return tally.finish(name);
}

EvalReport evaluate_depth_maps(const std::vector<std::string>& names, const std::vector<Rasterf>& estimates,
                               const std::vector<Rasterf>& groundTruths) {
  if (names.size() != estimates.size() || names.size() != groundTruths.size())
    throw std::runtime_error("evaluate_depth_maps: view sets do not match");
  EvalReport report;
  Tally pooled;
  for (size_t v = 0; v < names.size(); ++v) {
    report.perView.push_back(evaluate_depth(names[v], estimates[v], groundTruths[v]));
    for (Index r = 0; r < estimates[v].rows(); ++r)
      for (Index c = 0; c < estimates[v].cols(); ++c) pooled.add(estimates[v](r, c), groundTruths[v](r, c));
  }
  report.total = pooled.finish("all");
  return report;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  out.precision(6);
  out << "rmse=" << report.total.rmse << "\n";
  out << "completeness@1%=" << report.total.completeness1 << "\n";
  out << "completeness@2%=" << report.total.completeness2 << "\n";
  out << "accuracy@1%=" << report.total.accuracy1 << "\n";
  out << "accuracy@2%=" << report.total.accuracy2 << "\n";
  out << "runtime_seconds=" << report.runtimeSeconds << "\n";
  out << "peak_raster_bytes=" << report.peakRasterBytes << "\n";
  out << "\nview\trmse\tcomp@1%\tcomp@2%\tacc@1%\tacc@2%\n";
  for (const ViewEval& v : report.perView)
    out << v.view << "\t" << v.rmse << "\t" << v.completeness1 << "\t" << v.completeness2 << "\t"
        << v.accuracy1 << "\t" << v.accuracy2 << "\n";
  return out.str();
}

}  // namespace segmvs
