#include "roadseg/eval.hpp"

#include <algorithm>

#include "roadseg/errors.hpp"

namespace roadseg {

Confusion confusion(const RoadMask& pred, const RoadMask& gt, const RoadMask* valid) {
  if (pred.x_cells != gt.x_cells || pred.y_cells != gt.y_cells)
    throw ShapeError("confusion: prediction and ground truth dimensions differ");
  if (valid && (valid->x_cells != gt.x_cells || valid->y_cells != gt.y_cells))
    throw ShapeError("confusion: valid mask dimensions differ");

  Confusion c;
  for (std::size_t i = 0; i < gt.cells.size(); ++i) {
    if (valid && valid->cells[i] == 0) continue;
    const bool p = pred.cells[i] != 0;
    const bool g = gt.cells[i] != 0;
    if (p && g)
      ++c.tp;
    else if (p && !g)
      ++c.fp;
    else if (!p && g)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  t.reserve(99);
  for (int i = 1; i <= 99; ++i) t.push_back(static_cast<double>(i) / 100.0);
  return t;
}

PrCurve pr_sweep(const std::function<RoadMask(double)>& prob_source, const RoadMask& gt,
                 std::span<const double> thresholds) {
  if (thresholds.empty()) throw ConfigError("pr_sweep: at least one threshold required");
  PrCurve curve;
  curve.reserve(thresholds.size());
  for (double tau : thresholds) {
    const RoadMask pred = prob_source(tau);
    const Confusion c = confusion(pred, gt);
    PrPoint pt;
    pt.threshold = tau;
    pt.precision = (c.tp + c.fp == 0)
                       ? 1.0
                       : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    pt.recall = (c.tp + c.fn == 0)
                    ? 1.0
                    : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    curve.push_back(pt);
  }
  return curve;
}

double f_max(const PrCurve& curve) {
  if (curve.empty()) throw Error("f_max: empty curve");
  double best = 0.0;
  for (const auto& pt : curve) {
    const double denom = pt.precision + pt.recall;
    const double f = denom == 0.0 ? 0.0 : 2.0 * pt.precision * pt.recall / denom;
    best = std::max(best, f);
  }
  return best;
}

double average_precision(const PrCurve& curve) {
  if (curve.empty()) throw Error("average_precision: empty curve");
  double sum = 0.0;
  for (int level = 0; level <= 10; ++level) {
    const double r = static_cast<double>(level) / 10.0;
    double best = 0.0;
    for (const auto& pt : curve)
      if (pt.recall >= r) best = std::max(best, pt.precision);
    sum += best;
  }
  return sum / 11.0;
}

EvalReport make_report(PrCurve curve) {
  EvalReport report;
  report.f_max = f_max(curve);
  report.average_precision = average_precision(curve);
  report.curve = std::move(curve);
  return report;
}

}  // namespace roadseg
