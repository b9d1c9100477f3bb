// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef KAMIR_DETECTION_HPP_
#define KAMIR_DETECTION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kamir/spectral.hpp"

namespace kamir {

// Per-frame interference activity, scaled so the maximum is 1.
// `normalization` keeps the raw maximum (0 for an all-zero curve).
struct ActivityCurve {
  Eigen::VectorXd values;
  double normalization = 0.0;

  int size() const { return static_cast<int>(values.size()); }
};

// Two-state decoder parameters: frames whose normalized activity sits on
// the wrong side of `threshold` pay the distance to it, and every state
// change costs `switch_cost`.
struct HmmParams {
  double threshold = 0.15;
  double switch_cost = 0.2;
};

struct InterferenceIndicator {
  std::vector<std::uint8_t> frames;  // 0/1 per frame
  ActivityCurve curve;

  int size() const { return static_cast<int>(frames.size()); }
  int count_active() const;
  bool active(int t) const { return frames[static_cast<std::size_t>(t)] != 0; }
};

// Sums the fixed-dictionary activations per frame and scales by the
// maximum. An all-zero input yields an all-zero curve.
ActivityCurve activity_curve(const Eigen::MatrixXd &h_fixed);

// Minimum-cost binary path for the hinge emission costs
//   emission(0, a) = max(0, a - threshold)
//   emission(1, a) = max(0, threshold - a)
// plus switch_cost per state change. Among equal-cost paths the
// lexicographically largest one (state 1 preferred, scanning left to
// right) is returned, which favours recall.
InterferenceIndicator decode_indicator(const ActivityCurve &curve,
                                       const HmmParams &params);

// Extends every run of 1s by `margin` frames on both sides.
InterferenceIndicator dilate_indicator(const InterferenceIndicator &ind,
                                       int margin);

// (start, end) frame ranges of the indicator's 1-runs, end exclusive.
std::vector<std::pair<int, int>> indicator_runs(const InterferenceIndicator &ind);

// frame_index,activity,indicator rows.
void write_indicator_csv(const std::string &path,
                         const InterferenceIndicator &ind);

// One "start_s\tend_s" line per detected segment, using the time span
// the frames were computed from.
void write_segment_labels(const std::string &path,
                          const InterferenceIndicator &ind,
                          const Framing &framing);

}  // namespace kamir

#endif  // KAMIR_DETECTION_HPP_
