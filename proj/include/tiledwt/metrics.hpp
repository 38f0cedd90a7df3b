#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>

#include "tiledwt/error.hpp"
#include "tiledwt/inspect.hpp"

namespace tiledwt {

struct LabeledVerdict {
  std::string image_id;
  Verdict truth = Verdict::Ok;
  Verdict predicted = Verdict::Ok;
  double distance = 0.0;
};

struct AccuracyReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t true_ok = 0;
  std::size_t true_defective = 0;
  std::size_t false_ok = 0;         // defective tile passed as OK
  std::size_t false_defective = 0;  // clean tile rejected
  double ca_percent = 0.0;

  friend bool operator==(const AccuracyReport&, const AccuracyReport&) = default;
};

inline AccuracyReport confusion(std::span<const LabeledVerdict> verdicts) {
  if (verdicts.empty()) throw Error(ErrorCode::EmptyInput, "no verdicts to aggregate");
  AccuracyReport rep;
  for (const LabeledVerdict& v : verdicts) {
    if (!(v.distance >= 0.0)) {
      throw Error(ErrorCode::NegativeDistance, v.image_id + ": " + std::to_string(v.distance));
    }
    const bool truth_ok = v.truth == Verdict::Ok;
    const bool pred_ok = v.predicted == Verdict::Ok;
    if (truth_ok && pred_ok) ++rep.true_ok;
    else if (!truth_ok && !pred_ok) ++rep.true_defective;
    else if (!truth_ok && pred_ok) ++rep.false_ok;
    else ++rep.false_defective;
  }
  rep.total = verdicts.size();
  rep.correct = rep.true_ok + rep.true_defective;
  rep.ca_percent = 100.0 * static_cast<double>(rep.correct) / static_cast<double>(rep.total);
  return rep;
}

inline constexpr double kDefaultCalibrationMargin = 0.05;

// Threshold just above the worst clean-sample distance.
inline double calibrate_threshold(std::span<const double> clean_distances,
                                  double margin = kDefaultCalibrationMargin) {
  if (clean_distances.empty()) throw Error(ErrorCode::EmptyInput, "no clean distances");
  if (!(margin >= 0.0)) throw Error(ErrorCode::InvalidArgument, "margin must be >= 0");
  const double worst = *std::max_element(clean_distances.begin(), clean_distances.end());
  if (!(worst >= 0.0)) throw Error(ErrorCode::NegativeDistance, std::to_string(worst));
  return worst * (1.0 + margin);
}

}  // namespace tiledwt
