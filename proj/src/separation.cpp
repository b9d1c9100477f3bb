// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "kamir/separation.hpp"

#include <complex>
#include <stdexcept>

namespace kamir {

MagSpectrogram noise_estimate(const MagSpectrogram &x_bar,
                              const MagSpectrogram &s_bar) {
  if (x_bar.values.rows() != s_bar.values.rows() ||
      x_bar.values.cols() != s_bar.values.cols())
    throw std::invalid_argument("noise_estimate: shape mismatch");
  MagSpectrogram n_bar;
  n_bar.framing = x_bar.framing;
  n_bar.values = (x_bar.values - s_bar.values).cwiseMax(0.0);
  return n_bar;
}

SeparationResult soft_mask_separate(const ComplexSpectrogram &x,
                                    const MagSpectrogram &s_bar) {
  if (x.bins.rows() != s_bar.values.rows() ||
      x.bins.cols() != s_bar.values.cols())
    throw std::invalid_argument("soft_mask_separate: shape mismatch");

  SeparationResult res;
  res.music_mag = s_bar;
  res.music_mag.framing = x.framing;
  MagSpectrogram x_mag = magnitude(x);
  res.noise_mag = noise_estimate(x_mag, s_bar);

  const Eigen::Index bins = x.bins.rows();
  const Eigen::Index frames = x.bins.cols();
  res.mask.resize(bins, frames);
  res.music_spec.framing = x.framing;
  res.music_spec.bins.resize(bins, frames);
  res.interference_spec.framing = x.framing;
  res.interference_spec.bins.resize(bins, frames);

  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index f = 0; f < bins; ++f) {
      const double s = s_bar.values(f, t);
      const double n = res.noise_mag.values(f, t);
      const double denom = s + n;
      const double m = denom > 0.0 ? s / denom : 1.0;  // 0/0 -> music
      res.mask(f, t) = m;

      // One factor of each complementary pair is >= 0.5, so the other
      // stem computed as a difference is exact (Sterbenz) and the two
      // stems sum back to X bit-exactly.
      const std::complex<double> v = x.bins(f, t);
      std::complex<double> music, interference;
      if (m >= 0.5) {
        music = {m * v.real(), m * v.imag()};
        interference = {v.real() - music.real(), v.imag() - music.imag()};
      } else {
        const double cm = 1.0 - m;
        interference = {cm * v.real(), cm * v.imag()};
        music = {v.real() - interference.real(), v.imag() - interference.imag()};
      }
      res.music_spec.bins(f, t) = music;
      res.interference_spec.bins(f, t) = interference;
    }
  }

  res.music = istft(res.music_spec);
  res.interference = istft(res.interference_spec);
  return res;
}

}  // namespace kamir
