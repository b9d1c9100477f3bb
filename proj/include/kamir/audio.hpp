// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef KAMIR_AUDIO_HPP_
#define KAMIR_AUDIO_HPP_

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace kamir {

// Mono audio in linear amplitude, nominally within [-1, 1].
struct AudioSignal {
  Eigen::VectorXd samples;
  int sample_rate = 0;

  std::int64_t size() const { return samples.size(); }
  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

enum class WavFormat {
  kPcm16,    // 16-bit signed integer PCM
  kFloat32,  // 32-bit IEEE float PCM
};

// Reads a mono WAV file (PCM16 or float32). Multi-channel or other
// encodings are rejected.
AudioSignal read_wav(const std::string &path);

void write_wav(const std::string &path, const AudioSignal &signal,
               WavFormat format = WavFormat::kFloat32);

}  // namespace kamir

#endif  // KAMIR_AUDIO_HPP_
