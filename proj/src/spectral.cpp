// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "kamir/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace kamir {

namespace {

// FFTW plan creation is not thread-safe; execution on distinct plans is.
std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}

struct RealFft {
  int n;
  double *in;
  fftw_complex *out;
  fftw_plan fwd;
  fftw_plan inv;

  explicit RealFft(int size) : n(size) {
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(n, out, in, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(in);
    fftw_free(out);
  }
  RealFft(const RealFft &) = delete;
  RealFft &operator=(const RealFft &) = delete;
};

struct FrameLayout {
  std::int64_t padded_size;  // zero-padded buffer length
  int num_frames;
};

FrameLayout layout_for(std::int64_t num_samples, int window, int hop) {
  // Base padding: one window on each side. The buffer is then extended
  // so the last frame start lands on a hop multiple.
  std::int64_t base = num_samples + 2 * static_cast<std::int64_t>(window);
  std::int64_t span = base - window;  // last start must be >= this
  std::int64_t last_start = ((span + hop - 1) / hop) * hop;
  FrameLayout l;
  l.num_frames = static_cast<int>(last_start / hop) + 1;
  l.padded_size = last_start + window;
  return l;
}

void check_framing(const Framing &f) {
  if (f.window_size < 2 || f.window_size % 2 != 0)
    throw std::invalid_argument("window_size must be even and >= 2");
  if (f.hop < 1 || f.hop > f.window_size)
    throw std::invalid_argument("hop must satisfy 0 < hop <= window_size");
}

}  // namespace

Eigen::VectorXd make_window(const std::string &name, int size) {
  Eigen::VectorXd w(size);
  if (name == "hann") {
    for (int i = 0; i < size; ++i)
      w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / size);  // periodic
  } else if (name == "rect") {
    w.setOnes();
  } else {
    throw std::invalid_argument("unknown analysis window: " + name);
  }
  return w;
}

ComplexSpectrogram stft(const AudioSignal &signal, int window_size, int hop,
                        const std::string &window) {
  if (signal.samples.size() == 0)
    throw std::invalid_argument("stft: empty signal");
  if (signal.sample_rate <= 0)
    throw std::invalid_argument("stft: sample_rate must be positive");

  ComplexSpectrogram spec;
  spec.framing.window_size = window_size;
  spec.framing.hop = hop;
  spec.framing.sample_rate = signal.sample_rate;
  spec.framing.window = window;
  spec.framing.num_samples = signal.samples.size();
  check_framing(spec.framing);

  const Eigen::VectorXd win = make_window(window, window_size);
  const FrameLayout layout =
      layout_for(signal.samples.size(), window_size, hop);

  Eigen::VectorXd padded = Eigen::VectorXd::Zero(layout.padded_size);
  padded.segment(window_size, signal.samples.size()) = signal.samples;

  const int num_bins = window_size / 2 + 1;
  spec.bins.resize(num_bins, layout.num_frames);

  RealFft fft(window_size);
  for (int t = 0; t < layout.num_frames; ++t) {
    const std::int64_t start = static_cast<std::int64_t>(t) * hop;
    for (int i = 0; i < window_size; ++i)
      fft.in[i] = padded[start + i] * win[i];
    fftw_execute(fft.fwd);
    for (int k = 0; k < num_bins; ++k)
      spec.bins(k, t) = std::complex<double>(fft.out[k][0], fft.out[k][1]);
  }
  return spec;
}

AudioSignal istft(const ComplexSpectrogram &spec) {
  check_framing(spec.framing);
  const int window_size = spec.framing.window_size;
  const int hop = spec.framing.hop;
  if (spec.num_bins() != spec.framing.num_bins())
    throw std::invalid_argument(
        "istft: bin count does not match window_size/2+1");
  if (spec.num_frames() < 1) throw std::invalid_argument("istft: empty spectrogram");

  const Eigen::VectorXd win = make_window(spec.framing.window, window_size);
  const std::int64_t padded_size =
      static_cast<std::int64_t>(spec.num_frames() - 1) * hop + window_size;

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(padded_size);
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(padded_size);

  RealFft fft(window_size);
  const double scale = 1.0 / window_size;  // FFTW c2r is unnormalized
  for (int t = 0; t < spec.num_frames(); ++t) {
    for (int k = 0; k < spec.num_bins(); ++k) {
      fft.out[k][0] = spec.bins(k, t).real();
      fft.out[k][1] = spec.bins(k, t).imag();
    }
    fftw_execute(fft.inv);
    const std::int64_t start = static_cast<std::int64_t>(t) * hop;
    for (int i = 0; i < window_size; ++i) {
      acc[start + i] += win[i] * fft.in[i] * scale;
      weight[start + i] += win[i] * win[i];
    }
  }

  std::int64_t out_len = spec.framing.num_samples;
  if (out_len <= 0 || window_size + out_len > padded_size)
    throw std::invalid_argument("istft: inconsistent num_samples metadata");

  AudioSignal out;
  out.sample_rate = spec.framing.sample_rate;
  out.samples.resize(out_len);
  for (std::int64_t i = 0; i < out_len; ++i) {
    const double w = weight[window_size + i];
    out.samples[i] = w > 0.0 ? acc[window_size + i] / w : 0.0;
  }
  return out;
}

MagSpectrogram magnitude(const ComplexSpectrogram &spec) {
  MagSpectrogram mag;
  mag.framing = spec.framing;
  mag.values = spec.bins.cwiseAbs();
  return mag;
}

MagSpectrogram smooth_frequency(const MagSpectrogram &mag, double sigma) {
  if (sigma < 0.0)
    throw std::invalid_argument("smooth_frequency: sigma must be >= 0");
  if (sigma == 0.0) return mag;

  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  Eigen::VectorXd kernel(2 * radius + 1);
  for (int j = -radius; j <= radius; ++j)
    kernel[j + radius] = std::exp(-0.5 * (j * j) / (sigma * sigma));
  kernel /= kernel.sum();

  const int num_bins = mag.num_bins();
  const int num_frames = mag.num_frames();
  MagSpectrogram out;
  out.framing = mag.framing;
  out.values.resize(num_bins, num_frames);

  for (int t = 0; t < num_frames; ++t) {
    for (int f = 0; f < num_bins; ++f) {
      const int lo = std::max(-radius, -f);
      const int hi = std::min(radius, num_bins - 1 - f);
      double acc = 0.0, norm = 0.0;
      for (int j = lo; j <= hi; ++j) {
        const double w = kernel[j + radius];
        acc += w * mag.values(f + j, t);
        norm += w;
      }
      out.values(f, t) = acc / norm;
    }
  }
  return out;
}

std::pair<std::int64_t, std::int64_t> frame_sample_range(const Framing &framing,
                                                         int frame) {
  // Frame t reads padded samples [t*hop, t*hop + window); the analyzed
  // signal starts at padded index window_size.
  const std::int64_t start =
      static_cast<std::int64_t>(frame) * framing.hop - framing.window_size;
  const std::int64_t lo = std::clamp<std::int64_t>(start, 0, framing.num_samples);
  const std::int64_t hi = std::clamp<std::int64_t>(start + framing.window_size,
                                                   0, framing.num_samples);
  return {lo, hi};
}

}  // namespace kamir
