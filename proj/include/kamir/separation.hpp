// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef KAMIR_SEPARATION_HPP_
#define KAMIR_SEPARATION_HPP_

#include <Eigen/Core>

#include "kamir/audio.hpp"
#include "kamir/spectral.hpp"

namespace kamir {

struct SeparationResult {
  AudioSignal music;
  AudioSignal interference;
  ComplexSpectrogram music_spec;
  ComplexSpectrogram interference_spec;
  MagSpectrogram music_mag;   // S_bar as given to the mask
  MagSpectrogram noise_mag;   // N_bar = max(X_bar - S_bar, 0)
  Eigen::MatrixXd mask;       // entries in [0,1]
};

// N_bar = max(X_bar - S_bar, 0), element-wise.
MagSpectrogram noise_estimate(const MagSpectrogram &x_bar,
                              const MagSpectrogram &s_bar);

// Soft mask S_bar/(S_bar + N_bar) applied to the complex mixture, with
// 0/0 treated as 1 (silent bins belong to the music). The music and
// interference spectrograms sum to X bit-exactly per bin, and both are
// resynthesized with the mixture phase.
SeparationResult soft_mask_separate(const ComplexSpectrogram &x,
                                    const MagSpectrogram &s_bar);

}  // namespace kamir

#endif  // KAMIR_SEPARATION_HPP_
