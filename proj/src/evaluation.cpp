// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "kamir/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace kamir {

namespace {

constexpr double kDbCap = 100.0;

double capped_db(double num, double den) {
  if (num <= 0.0) return -kDbCap;
  if (den <= 0.0) return kDbCap;
  return std::clamp(10.0 * std::log10(num / den), -kDbCap, kDbCap);
}

void check_same_length(const AudioSignal &a, const AudioSignal &b,
                       const char *what) {
  if (a.samples.size() != b.samples.size())
    throw std::invalid_argument(std::string(what) + ": length mismatch");
}

BssDecomposition bss_decompose_vec(const Eigen::VectorXd &e,
                                   const Eigen::VectorXd &s,
                                   const Eigen::VectorXd &n) {
  const double ss = s.squaredNorm();
  if (ss <= 0.0)
    throw std::invalid_argument("bss_eval: zero-energy true source");
  const double nn = n.squaredNorm();
  const double sn = s.dot(n);
  const double es = e.dot(s);
  const double en = e.dot(n);

  BssDecomposition out;
  out.s_target = (es / ss) * s;
  Eigen::VectorXd in_span;
  const double det = ss * nn - sn * sn;
  if (nn <= 0.0 || det <= 1e-14 * ss * nn) {
    // Interference silent or collinear with the source: the span is 1-D.
    in_span = out.s_target;
  } else {
    const double cs = (nn * es - sn * en) / det;
    const double cn = (ss * en - sn * es) / det;
    in_span = cs * s + cn * n;
  }
  out.e_interf = in_span - out.s_target;
  out.e_artif = e - in_span;

  const double target_energy = out.s_target.squaredNorm();
  out.scores.sdr_db = capped_db(target_energy, out.e_interf.squaredNorm() +
                                                   out.e_artif.squaredNorm());
  out.scores.sir_db = capped_db(target_energy, out.e_interf.squaredNorm());
  return out;
}

BssScores bss_eval_vec(const Eigen::VectorXd &e, const Eigen::VectorXd &s,
                       const Eigen::VectorXd &n) {
  return bss_decompose_vec(e, s, n).scores;
}

}  // namespace

AudioSignal rms_normalize(const AudioSignal &signal, double target_rms) {
  if (signal.samples.size() == 0)
    throw std::invalid_argument("rms_normalize: empty signal");
  if (target_rms <= 0.0)
    throw std::invalid_argument("rms_normalize: target_rms must be positive");
  const double rms = std::sqrt(signal.samples.squaredNorm() /
                               static_cast<double>(signal.samples.size()));
  if (rms <= 0.0)
    throw std::invalid_argument("rms_normalize: all-zero signal");
  AudioSignal out = signal;
  out.samples *= target_rms / rms;
  return out;
}

MixtureResult synthesize_mixture(const MixSpec &spec) {
  const AudioSignal clean = rms_normalize(spec.music, spec.target_rms);
  const std::int64_t total = clean.samples.size();

  struct Placed {
    Segment range;
    const InterferenceEvent *event;
  };
  std::vector<Placed> placed;
  for (const auto &event : spec.events) {
    if (event.sound.samples.size() == 0)
      throw std::invalid_argument("synthesize_mixture: empty interference event");
    if (event.sound.sample_rate != clean.sample_rate)
      throw std::invalid_argument(
          "synthesize_mixture: event sample rate differs from the music");
    if (event.onset_seconds < 0.0)
      throw std::invalid_argument("synthesize_mixture: negative onset");
    const std::int64_t begin =
        std::llround(event.onset_seconds * clean.sample_rate);
    const std::int64_t end = begin + event.sound.samples.size();
    if (end > total)
      throw std::invalid_argument(
          "synthesize_mixture: event exceeds music duration");
    placed.push_back({{begin, end}, &event});
  }
  std::sort(placed.begin(), placed.end(),
            [](const Placed &a, const Placed &b) {
              return a.range.begin < b.range.begin;
            });
  for (std::size_t i = 1; i < placed.size(); ++i)
    if (placed[i].range.begin < placed[i - 1].range.end)
      throw std::invalid_argument("synthesize_mixture: overlapping events");

  MixtureResult result;
  result.interference_track.sample_rate = clean.sample_rate;
  result.interference_track.samples = Eigen::VectorXd::Zero(total);
  for (const auto &p : placed) {
    const auto len = p.event->sound.samples.size();
    const double music_energy =
        clean.samples.segment(p.range.begin, len).squaredNorm();
    if (music_energy <= 0.0)
      throw std::invalid_argument(
          "synthesize_mixture: music is silent over an event segment");
    const double event_energy = p.event->sound.samples.squaredNorm();
    if (event_energy <= 0.0)
      throw std::invalid_argument("synthesize_mixture: silent interference event");
    const double wanted = music_energy / std::pow(10.0, spec.snr_db / 10.0);
    const double gain = std::sqrt(wanted / event_energy);
    result.interference_track.samples.segment(p.range.begin, len) +=
        gain * p.event->sound.samples;
    result.segments.push_back(p.range);
    result.gains.push_back(gain);
  }

  result.mixture.sample_rate = clean.sample_rate;
  result.mixture.samples = clean.samples + result.interference_track.samples;
  // Return the complement as the clean stem so that
  // mixture - interference_track == clean_music holds bit-exactly.
  result.clean_music.sample_rate = clean.sample_rate;
  result.clean_music.samples =
      result.mixture.samples - result.interference_track.samples;
  return result;
}

BssScores bss_eval(const AudioSignal &estimate, const AudioSignal &true_source,
                   const AudioSignal &true_interference) {
  return bss_eval_decompose(estimate, true_source, true_interference).scores;
}

BssDecomposition bss_eval_decompose(const AudioSignal &estimate,
                                    const AudioSignal &true_source,
                                    const AudioSignal &true_interference) {
  check_same_length(estimate, true_source, "bss_eval");
  check_same_length(estimate, true_interference, "bss_eval");
  if (estimate.samples.size() == 0)
    throw std::invalid_argument("bss_eval: empty signals");
  return bss_decompose_vec(estimate.samples, true_source.samples,
                           true_interference.samples);
}

NormalizedScores normalized_scores(double sdr_est_db, double sir_est_db,
                                   double sdr_mix_db, double sir_mix_db) {
  return {sdr_est_db - sdr_mix_db, sir_est_db - sir_mix_db};
}

NormalizedScores segment_scores(const AudioSignal &estimate,
                                const AudioSignal &true_source,
                                const AudioSignal &true_interference,
                                const std::vector<Segment> &segments) {
  check_same_length(estimate, true_source, "segment_scores");
  check_same_length(estimate, true_interference, "segment_scores");
  if (segments.empty())
    throw std::invalid_argument("segment_scores: empty segment list");

  double nsdr_sum = 0.0, nsir_sum = 0.0;
  for (const auto &seg : segments) {
    if (seg.begin < 0 || seg.end <= seg.begin ||
        seg.end > estimate.samples.size())
      throw std::invalid_argument("segment_scores: segment out of bounds");
    const auto len = seg.length();
    const Eigen::VectorXd est = estimate.samples.segment(seg.begin, len);
    const Eigen::VectorXd src = true_source.samples.segment(seg.begin, len);
    const Eigen::VectorXd itf = true_interference.samples.segment(seg.begin, len);
    const BssScores est_scores = bss_eval_vec(est, src, itf);
    const BssScores mix_scores = bss_eval_vec(src + itf, src, itf);
    const NormalizedScores ns = normalized_scores(
        est_scores.sdr_db, est_scores.sir_db, mix_scores.sdr_db,
        mix_scores.sir_db);
    nsdr_sum += ns.nsdr_db;
    nsir_sum += ns.nsir_db;
  }
  const double count = static_cast<double>(segments.size());
  return {nsdr_sum / count, nsir_sum / count};
}

EvalReport evaluate_separation(const AudioSignal &estimate,
                               const AudioSignal &true_source,
                               const AudioSignal &true_interference,
                               const std::vector<Segment> &segments) {
  EvalReport report;
  report.estimate = bss_eval(estimate, true_source, true_interference);
  AudioSignal mix;
  mix.sample_rate = true_source.sample_rate;
  mix.samples = true_source.samples + true_interference.samples;
  report.mixture = bss_eval(mix, true_source, true_interference);
  const NormalizedScores ns =
      normalized_scores(report.estimate.sdr_db, report.estimate.sir_db,
                        report.mixture.sdr_db, report.mixture.sir_db);
  report.nsdr_db = ns.nsdr_db;
  report.nsir_db = ns.nsir_db;
  report.segments = segments;
  if (!segments.empty()) {
    const NormalizedScores seg =
        segment_scores(estimate, true_source, true_interference, segments);
    report.segment_nsdr_db = seg.nsdr_db;
    report.segment_nsir_db = seg.nsir_db;
  }
  return report;
}

void write_report_csv(const std::string &path, const EvalReport &report) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot create report CSV: " + path);
  f.precision(10);
  f << "sdr_db,sir_db,mix_sdr_db,mix_sir_db,nsdr_db,nsir_db,"
       "segment_nsdr_db,segment_nsir_db,num_segments\n";
  f << report.estimate.sdr_db << "," << report.estimate.sir_db << ","
    << report.mixture.sdr_db << "," << report.mixture.sir_db << ","
    << report.nsdr_db << "," << report.nsir_db << "," << report.segment_nsdr_db
    << "," << report.segment_nsir_db << "," << report.segments.size() << "\n";
}

std::string format_report_table(const EvalReport &report) {
  std::ostringstream os;
  os.precision(2);
  os << std::fixed;
  os << "                 SDR      SIR\n";
  os << "estimate    " << std::setw(8) << report.estimate.sdr_db << " "
     << std::setw(8) << report.estimate.sir_db << "\n";
  os << "mixture     " << std::setw(8) << report.mixture.sdr_db << " "
     << std::setw(8) << report.mixture.sir_db << "\n";
  os << "normalized  " << std::setw(8) << report.nsdr_db << " " << std::setw(8)
     << report.nsir_db << "\n";
  if (!report.segments.empty())
    os << "segments    " << std::setw(8) << report.segment_nsdr_db << " "
       << std::setw(8) << report.segment_nsir_db << "  (" << report.segments.size()
       << " segments)\n";
  return os.str();
}

void write_segments_csv(const std::string &path,
                        const std::vector<Segment> &segments, int sample_rate) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot create segments CSV: " + path);
  f << "start_sample,end_sample,start_seconds,end_seconds\n";
  f.precision(9);
  for (const auto &seg : segments)
    f << seg.begin << "," << seg.end << ","
      << static_cast<double>(seg.begin) / sample_rate << ","
      << static_cast<double>(seg.end) / sample_rate << "\n";
}

std::vector<Segment> read_segments_csv(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open segments CSV: " + path);
  std::vector<Segment> segments;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    Segment seg;
    if (!(row >> seg.begin >> seg.end)) continue;  // header or malformed
    segments.push_back(seg);
  }
  return segments;
}

}  // namespace kamir
