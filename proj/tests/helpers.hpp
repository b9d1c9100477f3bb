// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef KAMIR_TESTS_HELPERS_HPP_
#define KAMIR_TESTS_HELPERS_HPP_

#include <random>

#include <Eigen/Core>

#include "kamir/audio.hpp"
#include "kamir/spectral.hpp"

namespace kamir::test {

inline Eigen::VectorXd random_vector(std::mt19937 &rng, int n, double lo = -1.0,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline Eigen::MatrixXd random_nonnegative(std::mt19937 &rng, int rows, int cols,
                                          double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = dist(rng);
  return m;
}

inline AudioSignal random_signal(std::mt19937 &rng, int n, int sample_rate) {
  AudioSignal s;
  s.sample_rate = sample_rate;
  s.samples = random_vector(rng, n);
  return s;
}

inline MagSpectrogram make_mag(const Eigen::MatrixXd &values,
                               int sample_rate = 8000) {
  MagSpectrogram m;
  m.values = values;
  m.framing.window_size = static_cast<int>(2 * (values.rows() - 1));
  m.framing.hop = std::max(1, m.framing.window_size / 4);
  m.framing.sample_rate = sample_rate;
  m.framing.num_samples = values.cols() * m.framing.hop;
  return m;
}

inline double relative_l2_error(const Eigen::VectorXd &a,
                                const Eigen::VectorXd &b) {
  return (a - b).norm() / b.norm();
}

}  // namespace kamir::test

#endif  // KAMIR_TESTS_HELPERS_HPP_
