// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "kamir/detection.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace kamir {

int InterferenceIndicator::count_active() const {
  int n = 0;
  for (std::uint8_t v : frames) n += v != 0;
  return n;
}

ActivityCurve activity_curve(const Eigen::MatrixXd &h_fixed) {
  if (h_fixed.size() > 0 && h_fixed.minCoeff() < 0.0)
    throw std::invalid_argument("activity_curve: negative activations");
  ActivityCurve curve;
  curve.values = h_fixed.colwise().sum();
  curve.normalization = curve.values.size() > 0 ? curve.values.maxCoeff() : 0.0;
  if (curve.normalization > 0.0) curve.values /= curve.normalization;
  return curve;
}

InterferenceIndicator decode_indicator(const ActivityCurve &curve,
                                       const HmmParams &params) {
  if (params.threshold < 0.0 || params.threshold > 1.0)
    throw std::invalid_argument("decode_indicator: threshold outside [0,1]");
  if (params.switch_cost < 0.0)
    throw std::invalid_argument("decode_indicator: negative switch cost");

  const int t_count = curve.size();
  InterferenceIndicator ind;
  ind.curve = curve;
  ind.frames.resize(static_cast<std::size_t>(t_count), 0);
  if (t_count == 0) return ind;

  auto emission = [&](int state, double a) {
    return state == 0 ? std::max(0.0, a - params.threshold)
                      : std::max(0.0, params.threshold - a);
  };

  // Suffix costs: best[s][t] = cheapest completion cost from state s at
  // frame t. Selecting greedily from the front with state 1 preferred on
  // ties yields the lexicographically largest minimum-cost path.
  std::vector<double> best0(t_count), best1(t_count);
  best0[t_count - 1] = emission(0, curve.values[t_count - 1]);
  best1[t_count - 1] = emission(1, curve.values[t_count - 1]);
  for (int t = t_count - 2; t >= 0; --t) {
    const double stay0 = best0[t + 1];
    const double go1 = best1[t + 1] + params.switch_cost;
    const double stay1 = best1[t + 1];
    const double go0 = best0[t + 1] + params.switch_cost;
    best0[t] = emission(0, curve.values[t]) + std::min(stay0, go1);
    best1[t] = emission(1, curve.values[t]) + std::min(stay1, go0);
  }

  int state = best1[0] <= best0[0] ? 1 : 0;
  ind.frames[0] = static_cast<std::uint8_t>(state);
  for (int t = 1; t < t_count; ++t) {
    const double to1 = best1[t] + (state == 1 ? 0.0 : params.switch_cost);
    const double to0 = best0[t] + (state == 0 ? 0.0 : params.switch_cost);
    state = to1 <= to0 ? 1 : 0;
    ind.frames[static_cast<std::size_t>(t)] = static_cast<std::uint8_t>(state);
  }
  return ind;
}

InterferenceIndicator dilate_indicator(const InterferenceIndicator &ind,
                                       int margin) {
  if (margin < 0)
    throw std::invalid_argument("dilate_indicator: margin must be >= 0");
  InterferenceIndicator out = ind;
  if (margin == 0) return out;
  const int t_count = ind.size();
  for (int t = 0; t < t_count; ++t) {
    if (!ind.active(t)) continue;
    const int lo = std::max(0, t - margin);
    const int hi = std::min(t_count - 1, t + margin);
    for (int j = lo; j <= hi; ++j) out.frames[static_cast<std::size_t>(j)] = 1;
  }
  return out;
}

std::vector<std::pair<int, int>> indicator_runs(const InterferenceIndicator &ind) {
  std::vector<std::pair<int, int>> runs;
  const int t_count = ind.size();
  int start = -1;
  for (int t = 0; t < t_count; ++t) {
    if (ind.active(t) && start < 0) start = t;
    if (!ind.active(t) && start >= 0) {
      runs.emplace_back(start, t);
      start = -1;
    }
  }
  if (start >= 0) runs.emplace_back(start, t_count);
  return runs;
}

void write_indicator_csv(const std::string &path,
                         const InterferenceIndicator &ind) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot create indicator CSV: " + path);
  f << "frame_index,activity,indicator\n";
  f.precision(17);
  for (int t = 0; t < ind.size(); ++t)
    f << t << "," << ind.curve.values[t] << "," << (ind.active(t) ? 1 : 0)
      << "\n";
}

void write_segment_labels(const std::string &path,
                          const InterferenceIndicator &ind,
                          const Framing &framing) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot create label file: " + path);
  f.precision(6);
  f << std::fixed;
  for (const auto &[first, last] : indicator_runs(ind)) {
    const auto begin = frame_sample_range(framing, first);
    const auto end = frame_sample_range(framing, last - 1);
    const double t0 = static_cast<double>(begin.first) / framing.sample_rate;
    const double t1 = static_cast<double>(end.second) / framing.sample_rate;
    f << t0 << "\t" << t1 << "\n";
  }
}

}  // namespace kamir
