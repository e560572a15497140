#ifndef ROADSEG_EVAL_HPP
#define ROADSEG_EVAL_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "roadseg/bev.hpp"

namespace roadseg {

struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
};

/// Cell-wise confusion counts; `valid` restricts the tally when given.
/// Throws ShapeError on dimension mismatch.
Confusion confusion(const RoadMask& pred, const RoadMask& gt, const RoadMask* valid = nullptr);

struct PrPoint {
  double threshold = 0.0;
  double precision = 1.0;
  double recall = 1.0;
};

using PrCurve = std::vector<PrPoint>;

/// 0.01, 0.02, ..., 0.99.
std::vector<double> default_thresholds();

/// Precision/recall per threshold. prob_source re-runs the prediction path
/// at a given confidence cut. Conventions at empty denominators: P = 1 when
/// nothing was predicted road, R = 1 when the ground truth is empty.
PrCurve pr_sweep(const std::function<RoadMask(double)>& prob_source, const RoadMask& gt,
                 std::span<const double> thresholds);

/// Maximum F1 = 2PR/(P+R) over the curve (0 where P+R = 0).
/// Throws Error on an empty curve.
double f_max(const PrCurve& curve);

/// Eleven-point interpolated average precision: mean over recall levels
/// {0.0, 0.1, ..., 1.0} of the best precision at recall >= level.
double average_precision(const PrCurve& curve);

struct EvalReport {
  double f_max = 0.0;
  double average_precision = 0.0;
  PrCurve curve;
};

EvalReport make_report(PrCurve curve);

}  // namespace roadseg

#endif  // ROADSEG_EVAL_HPP
