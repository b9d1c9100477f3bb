// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef KAMIR_SPECTRAL_HPP_
#define KAMIR_SPECTRAL_HPP_

#include <complex>
#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "kamir/audio.hpp"

namespace kamir {

// Analysis metadata shared by complex and magnitude spectrograms.
// num_samples records the length of the analyzed signal so that
// resynthesis can trim the overlap-add padding exactly.
struct Framing {
  int window_size = 4096;
  int hop = 1024;
  int sample_rate = 44100;
  std::string window = "hann";
  std::int64_t num_samples = 0;

  int num_bins() const { return window_size / 2 + 1; }
  bool compatible_with(const Framing &o) const {
    return window_size == o.window_size && hop == o.hop &&
           sample_rate == o.sample_rate;
  }
};

// F x T complex STFT matrix; column t is the spectrum of frame t.
struct ComplexSpectrogram {
  Eigen::MatrixXcd bins;
  Framing framing;

  int num_bins() const { return static_cast<int>(bins.rows()); }
  int num_frames() const { return static_cast<int>(bins.cols()); }
};

// F x T non-negative real matrix with the same framing metadata.
struct MagSpectrogram {
  Eigen::MatrixXd values;
  Framing framing;

  int num_bins() const { return static_cast<int>(values.rows()); }
  int num_frames() const { return static_cast<int>(values.cols()); }
};

// Short-time Fourier transform. The signal is zero-padded by one window
// on both sides so every sample gets full overlap-add weight; frames are
// placed at multiples of `hop` over the padded buffer. window_size must
// be even, 0 < hop <= window_size.
ComplexSpectrogram stft(const AudioSignal &signal, int window_size = 4096,
                        int hop = 1024, const std::string &window = "hann");

// Weighted overlap-add inverse; returns exactly framing.num_samples
// samples. Exact (to rounding) for unmodified spectrograms of any
// window with hop <= window_size.
AudioSignal istft(const ComplexSpectrogram &spec);

MagSpectrogram magnitude(const ComplexSpectrogram &spec);

// Smooths each column with a truncated Gaussian (std dev `sigma` bins,
// support +-ceil(3 sigma)); at the spectrum edges the kernel is
// renormalized over the valid support, so every output bin stays a
// convex combination of input bins. sigma == 0 is the identity.
MagSpectrogram smooth_frequency(const MagSpectrogram &mag, double sigma);

// Contiguous sample window a frame was computed from, clipped to the
// analyzed signal: [first, second). May be empty for frames that cover
// only padding.
std::pair<std::int64_t, std::int64_t> frame_sample_range(const Framing &framing,
                                                         int frame);

// Windowing helper, exposed for tests: periodic "hann" or "rect".
Eigen::VectorXd make_window(const std::string &name, int size);

}  // namespace kamir

#endif  // KAMIR_SPECTRAL_HPP_
