// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef KAMIR_EVALUATION_HPP_
#define KAMIR_EVALUATION_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "kamir/audio.hpp"

namespace kamir {

// Half-open sample range [begin, end).
struct Segment {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  std::int64_t length() const { return end - begin; }
};

struct InterferenceEvent {
  AudioSignal sound;
  double onset_seconds = 0.0;
};

struct MixSpec {
  AudioSignal music;
  std::vector<InterferenceEvent> events;
  double snr_db = 0.0;      // active-segment SNR for every event
  double target_rms = 0.1;  // music RMS before mixing
};

struct MixtureResult {
  AudioSignal mixture;
  AudioSignal clean_music;         // == mixture - interference_track, exactly
  AudioSignal interference_track;  // scaled events at their onsets
  std::vector<Segment> segments;   // one active range per event, sorted
  std::vector<double> gains;       // per-event scale factors
};

// Scales the signal to the requested root-mean-square amplitude.
AudioSignal rms_normalize(const AudioSignal &signal, double target_rms);

// RMS-normalizes the music and adds each interference event scaled so
// that 10*log10(E_music / E_interference) over the event's active
// samples equals snr_db. Overlapping or out-of-range events are
// rejected so segment scores stay well defined.
MixtureResult synthesize_mixture(const MixSpec &spec);

struct BssScores {
  double sdr_db = 0.0;
  double sir_db = 0.0;
};

// Time-invariant projection flavour of the BSS-eval decomposition:
// s_target is the projection of the estimate onto the true source,
// e_interf the rest of its projection onto span{source, interference},
// e_artif the out-of-span residual. Ratios are capped at +-100 dB.
BssScores bss_eval(const AudioSignal &estimate, const AudioSignal &true_source,
                   const AudioSignal &true_interference);

// The underlying decomposition, estimate = s_target + e_interf + e_artif.
struct BssDecomposition {
  Eigen::VectorXd s_target;
  Eigen::VectorXd e_interf;
  Eigen::VectorXd e_artif;
  BssScores scores;
};

BssDecomposition bss_eval_decompose(const AudioSignal &estimate,
                                    const AudioSignal &true_source,
                                    const AudioSignal &true_interference);

struct NormalizedScores {
  double nsdr_db = 0.0;
  double nsir_db = 0.0;
};

// NSDR/NSIR: estimate scores minus the unprocessed-mixture scores.
NormalizedScores normalized_scores(double sdr_est_db, double sir_est_db,
                                   double sdr_mix_db, double sir_mix_db);

// Per-segment NSDR/NSIR (mixture reconstructed as source+interference),
// averaged over the segments.
NormalizedScores segment_scores(const AudioSignal &estimate,
                                const AudioSignal &true_source,
                                const AudioSignal &true_interference,
                                const std::vector<Segment> &segments);

struct EvalReport {
  BssScores estimate;       // whole file
  BssScores mixture;        // whole file, unprocessed mix
  double nsdr_db = 0.0;
  double nsir_db = 0.0;
  double segment_nsdr_db = 0.0;
  double segment_nsir_db = 0.0;
  std::vector<Segment> segments;
};

// Whole-file and per-segment evaluation of a music estimate against the
// ground-truth stems.
EvalReport evaluate_separation(const AudioSignal &estimate,
                               const AudioSignal &true_source,
                               const AudioSignal &true_interference,
                               const std::vector<Segment> &segments);

void write_report_csv(const std::string &path, const EvalReport &report);
std::string format_report_table(const EvalReport &report);

// start_sample,end_sample,start_seconds,end_seconds rows.
void write_segments_csv(const std::string &path,
                        const std::vector<Segment> &segments, int sample_rate);
std::vector<Segment> read_segments_csv(const std::string &path);

}  // namespace kamir

#endif  // KAMIR_EVALUATION_HPP_
