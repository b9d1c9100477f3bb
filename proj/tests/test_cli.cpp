// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// End-to-end checks of the command-line tool: every subcommand runs
// against generated fixtures in a scratch directory, and a run manifest
// reproduces its outputs bit for bit.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "kamir/audio.hpp"
#include "synthetic_fixture.hpp"

namespace fs = std::filesystem;
using namespace kamir;

namespace {

const char *cli_path() { return KAMIR_CLI_PATH; }

int run_cli(const std::string &args) {
  const std::string command = std::string(cli_path()) + " " + args +
                              " > cli_stdout.txt 2> cli_stderr.txt";
  const int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path &path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Scratch {
  fs::path dir;
  Scratch() : dir("cli_scratch") {
    fs::remove_all(dir);
    fs::create_directories(dir / "exemplars");
    fs::create_directories(dir / "out");
  }
  std::string path(const std::string &name) const {
    return (dir / name).string();
  }
};

// Shared fixture: music, training bursts and a synthesized mixture all
// live on disk, the way the tool is actually used.
const Scratch &fixture() {
  static Scratch scratch;
  static bool ready = false;
  if (!ready) {
    test::BenchmarkParams params;
    params.duration_s = 8.0;
    params.num_events = 2;
    write_wav(scratch.path("music.wav"), test::benchmark_music(params));
    for (int i = 0; i < 6; ++i) {
      std::mt19937_64 rng(777 + i);
      const double seconds = 0.4 + 0.4 * test::uniform01(rng);
      write_wav(scratch.path("exemplars/burst" + std::to_string(i) + ".wav"),
                test::noise_burst(params.sample_rate, seconds, 900 + i));
    }
    ready = true;
  }
  return scratch;
}

const std::string kDetect = " --threshold 0.05 --margin 4 ";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("train --rank 4") == 1);  // missing required flags
}

TEST_CASE("train builds a dictionary from an exemplar directory") {
  const Scratch &s = fixture();
  CHECK(run_cli("train --exemplars " + s.path("exemplars") + " --out " +
                s.path("dict.kmx") + " --rank 6 --iters 80 --seed 5"
                " --window 512 --hop 128 --csv " + s.path("dict.csv")) == 0);
  const Dictionary dict = load_dictionary(s.path("dict.kmx"));
  CHECK(dict.rank() == 6);
  CHECK(dict.num_bins() == 257);
  for (int r = 0; r < dict.rank(); ++r)
    CHECK(dict.templates.col(r).sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fs::exists(s.path("dict.csv")));

  // Data errors exit with code 2.
  CHECK(run_cli("train --exemplars " + s.path("missing_dir") + " --out " +
                s.path("x.kmx")) == 2);
  CHECK(run_cli("train --exemplars " + s.path("exemplars") + " --out " +
                s.path("x.kmx") + " --rank 100000 --window 512 --hop 128") == 2);
}

TEST_CASE("synth creates a mixture with stems, segments and metadata") {
  const Scratch &s = fixture();
  CHECK(run_cli("synth --music " + s.path("music.wav") + " --interference-dir " +
                s.path("exemplars") + " --snr 0 --count 2 --seed 11" +
                " --out-dir " + s.path("out")) == 0);
  CHECK(fs::exists(s.path("out/music_mixture.wav")));
  CHECK(fs::exists(s.path("out/music_clean.wav")));
  CHECK(fs::exists(s.path("out/music_interference.wav")));
  CHECK(fs::exists(s.path("out/music_mix_meta.txt")));
  const auto segments = read_segments_csv(s.path("out/music_segments.csv"));
  REQUIRE(segments.size() == 2);
  CHECK(segments[0].end <= segments[1].begin);

  // Same seed, same bytes.
  const std::string before = slurp(s.path("out/music_mixture.wav"));
  CHECK(run_cli("synth --music " + s.path("music.wav") + " --interference-dir " +
                s.path("exemplars") + " --snr 0 --count 2 --seed 11" +
                " --out-dir " + s.path("out")) == 0);
  CHECK(slurp(s.path("out/music_mixture.wav")) == before);

  // The stems on disk recombine into the mixture.
  const AudioSignal mixture = read_wav(s.path("out/music_mixture.wav"));
  const AudioSignal clean = read_wav(s.path("out/music_clean.wav"));
  const AudioSignal interference = read_wav(s.path("out/music_interference.wav"));
  const double err =
      (mixture.samples - clean.samples - interference.samples).norm() /
      mixture.samples.norm();
  CHECK(err < 1e-6);

  CHECK(run_cli("synth --music " + s.path("music.wav") + " --interference-dir " +
                s.path("exemplars") + " --count 50 --out-dir " + s.path("out")) ==
        2);
}

TEST_CASE("separate writes estimates plus a reusable manifest") {
  const Scratch &s = fixture();
  const std::string common =
      "separate --input " + s.path("out/music_mixture.wav") + " --dict " +
      s.path("dict.kmx") + " --window 512 --hop 128 --r-s 8 --nmf-iters 60" +
      kDetect;
  CHECK(run_cli(common + "--out-dir " + s.path("out")) == 0);
  CHECK(fs::exists(s.path("out/music_mixture_music.wav")));
  CHECK(fs::exists(s.path("out/music_mixture_interference.wav")));
  CHECK(fs::exists(s.path("out/music_mixture_indicator.csv")));
  CHECK(fs::exists(s.path("out/music_mixture_detected.txt")));
  CHECK(fs::exists(s.path("out/music_mixture_manifest.txt")));

  // Re-running from the manifest alone reproduces the outputs exactly.
  const std::string music = slurp(s.path("out/music_mixture_music.wav"));
  const std::string interference =
      slurp(s.path("out/music_mixture_interference.wav"));
  fs::create_directories(s.path("out2"));
  CHECK(run_cli("separate --config " + s.path("out/music_mixture_manifest.txt") +
                " --out-dir " + s.path("out2")) == 0);
  CHECK(slurp(s.path("out2/music_mixture_music.wav")) == music);
  CHECK(slurp(s.path("out2/music_mixture_interference.wav")) == interference);

  // Missing dictionary file is a data error.
  CHECK(run_cli("separate --input " + s.path("out/music_mixture.wav") +
                " --dict " + s.path("nope.kmx")) == 2);
}

TEST_CASE("evaluate scores an estimate against the stems") {
  const Scratch &s = fixture();
  CHECK(run_cli("evaluate --estimate " + s.path("out/music_mixture_music.wav") +
                " --clean " + s.path("out/music_clean.wav") +
                " --interference " + s.path("out/music_interference.wav") +
                " --segments " + s.path("out/music_segments.csv") + " --out " +
                s.path("out/report.csv")) == 0);
  std::ifstream report(s.path("out/report.csv"));
  std::string header, row;
  REQUIRE(std::getline(report, header));
  REQUIRE(std::getline(report, row));
  // nsdr_db is the 5th column; the separation should beat the mix.
  std::stringstream ss(row);
  std::string field;
  double nsdr = 0.0;
  for (int i = 0; i < 5; ++i) {
    std::getline(ss, field, ',');
    if (i == 4) nsdr = std::stod(field);
  }
  CHECK(nsdr > 0.0);

  // Length mismatch is a data error.
  CHECK(run_cli("evaluate --estimate " + s.path("exemplars/burst0.wav") +
                " --clean " + s.path("out/music_clean.wav") +
                " --interference " + s.path("out/music_interference.wav")) == 2);
}

TEST_CASE("sweep walks the grid and reports every combination") {
  const Scratch &s = fixture();
  CHECK(run_cli("sweep --input " + s.path("out/music_mixture.wav") +
                " --clean " + s.path("out/music_clean.wav") +
                " --interference " + s.path("out/music_interference.wav") +
                " --segments " + s.path("out/music_segments.csv") +
                " --dict " + s.path("dict.kmx") +
                " --rs-grid 8 --k-grid 5,10 --c-grid 0,2" +
                " --window 512 --hop 128 --nmf-iters 40" + kDetect +
                " --out " + s.path("out/sweep.csv")) == 0);
  std::ifstream csv(s.path("out/sweep.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 1 + 2 * 2);  // header + |k| * |c|

  // Exactly one of --dict / --exemplars must be given.
  CHECK(run_cli("sweep --input " + s.path("out/music_mixture.wav") +
                " --clean " + s.path("out/music_clean.wav") +
                " --interference " + s.path("out/music_interference.wav")) == 1);
}

TEST_CASE("KAMIR_OUT_DIR provides the default output directory") {
  const Scratch &s = fixture();
  fs::create_directories(s.path("envout"));
  const std::string command =
      "KAMIR_OUT_DIR=" + s.path("envout") + " " + cli_path() + " synth --music " +
      s.path("music.wav") + " --interference-dir " + s.path("exemplars") +
      " --count 1 --seed 3 > cli_stdout.txt 2>&1";
  CHECK(WEXITSTATUS(std::system(command.c_str())) == 0);
  CHECK(fs::exists(s.path("envout/music_mixture.wav")));
}

}  // TEST_SUITE
