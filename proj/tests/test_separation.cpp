// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <random>

#include <doctest.h>

#include "helpers.hpp"
#include "kamir/separation.hpp"

using namespace kamir;

namespace {

ComplexSpectrogram random_spec(std::mt19937 &rng, int sample_rate = 8000) {
  AudioSignal s = test::random_signal(rng, 4000, sample_rate);
  return stft(s, 256, 64);
}

}  // namespace

TEST_SUITE("separation") {

TEST_CASE("noise_estimate clips the difference at zero") {
  Eigen::MatrixXd x(1, 3), s(1, 3);
  x << 3.0, 3.0, 3.0;
  s << 3.0, 5.0, 1.0;
  const MagSpectrogram n =
      noise_estimate(test::make_mag(x), test::make_mag(s));
  CHECK(n.values(0, 0) == 0.0);
  CHECK(n.values(0, 1) == 0.0);
  CHECK(n.values(0, 2) == 2.0);
  CHECK_THROWS_AS(
      noise_estimate(test::make_mag(x), test::make_mag(Eigen::MatrixXd::Ones(2, 2))),
      std::invalid_argument);
}

TEST_CASE("a perfect music estimate yields a unit mask and silent interference") {
  std::mt19937 rng(301);
  const ComplexSpectrogram x = random_spec(rng);
  const SeparationResult res = soft_mask_separate(x, magnitude(x));
  CHECK(res.mask.minCoeff() == 1.0);
  CHECK((res.music_spec.bins.array() == x.bins.array()).all());
  CHECK(res.interference.samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mask arithmetic on a single bin") {
  // X_bar = 3, S_bar = 1 -> N_bar = 2, mask = 1/3.
  ComplexSpectrogram x;
  x.framing.window_size = 2;
  x.framing.hop = 2;
  x.framing.window = "rect";
  x.framing.sample_rate = 8000;
  x.framing.num_samples = 2;
  x.bins = Eigen::MatrixXcd::Constant(2, 2, std::complex<double>(3.0, 0.0));
  MagSpectrogram s_bar = magnitude(x);
  s_bar.values.setConstant(1.0);
  const SeparationResult res = soft_mask_separate(x, s_bar);
  CHECK(res.mask(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(res.noise_mag.values(0, 0) == doctest::Approx(2.0));
  CHECK(res.music_spec.bins(0, 0).real() == doctest::Approx(1.0));
}

TEST_CASE("a zero music estimate sends flagged bins to the interference") {
  std::mt19937 rng(307);
  const ComplexSpectrogram x = random_spec(rng);
  MagSpectrogram s_bar = magnitude(x);
  s_bar.values.setZero();
  const SeparationResult res = soft_mask_separate(x, s_bar);
  // Nonzero bins get mask 0; exact-zero bins fall under the 0/0 -> 1 rule.
  for (int t = 0; t < x.num_frames(); t += 7)
    for (int f = 0; f < x.num_bins(); f += 11) {
      if (std::abs(x.bins(f, t)) > 0.0) {
        CHECK(res.mask(f, t) == 0.0);
        CHECK(res.music_spec.bins(f, t) == std::complex<double>(0.0, 0.0));
      } else {
        CHECK(res.mask(f, t) == 1.0);
      }
    }
}

TEST_CASE("masks stay within [0,1] and stems sum to the mixture bit-exactly") {
  std::mt19937 rng(311);
  for (int trial = 0; trial < 3; ++trial) {
    const ComplexSpectrogram x = random_spec(rng);
    // An arbitrary non-negative music estimate, uncorrelated with X.
    MagSpectrogram s_bar = magnitude(x);
    s_bar.values = test::random_nonnegative(rng, x.num_bins(), x.num_frames(),
                                            0.0, 2.0);
    const SeparationResult res = soft_mask_separate(x, s_bar);
    CHECK(res.mask.minCoeff() >= 0.0);
    CHECK(res.mask.maxCoeff() <= 1.0);
    for (int t = 0; t < x.num_frames(); ++t)
      for (int f = 0; f < x.num_bins(); ++f) {
        const std::complex<double> sum =
            res.music_spec.bins(f, t) + res.interference_spec.bins(f, t);
        CHECK(sum.real() == x.bins(f, t).real());
        CHECK(sum.imag() == x.bins(f, t).imag());
      }
  }
}

TEST_CASE("mask grows with the music estimate") {
  ComplexSpectrogram x;
  x.framing.window_size = 2;
  x.framing.hop = 2;
  x.framing.window = "rect";
  x.framing.sample_rate = 8000;
  x.framing.num_samples = 2;
  x.bins = Eigen::MatrixXcd::Constant(2, 2, std::complex<double>(2.0, 0.0));
  MagSpectrogram s_bar = magnitude(x);
  double previous = -1.0;
  for (double s : {0.0, 0.5, 1.0, 1.5, 2.0, 4.0}) {
    s_bar.values.setConstant(s);
    const double m = soft_mask_separate(x, s_bar).mask(0, 0);
    CHECK(m >= previous);
    previous = m;
  }
}

TEST_CASE("resynthesized stems sum to the input signal") {
  std::mt19937 rng(313);
  const AudioSignal input = test::random_signal(rng, 4000, 8000);
  const ComplexSpectrogram x = stft(input, 256, 64);
  MagSpectrogram s_bar = magnitude(x);
  s_bar.values = test::random_nonnegative(rng, x.num_bins(), x.num_frames(),
                                          0.0, 1.5);
  const SeparationResult res = soft_mask_separate(x, s_bar);
  const Eigen::VectorXd sum = res.music.samples + res.interference.samples;
  CHECK(test::relative_l2_error(sum, input.samples) < 1e-6);
}

TEST_CASE("an all-music mask reproduces the input end to end") {
  std::mt19937 rng(317);
  const AudioSignal input = test::random_signal(rng, 5000, 8000);
  const ComplexSpectrogram x = stft(input, 256, 64);
  const SeparationResult res = soft_mask_separate(x, magnitude(x));
  CHECK(test::relative_l2_error(res.music.samples, input.samples) < 1e-6);
}

}  // TEST_SUITE
