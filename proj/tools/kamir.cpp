// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// kamir: reduces non-stationary interferences (coughs, door slams,
// screams) in solo music recordings. Subcommands cover dictionary
// training, separation, mixture synthesis, evaluation and parameter
// sweeps. Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kamir/audio.hpp"
#include "kamir/evaluation.hpp"
#include "kamir/nmf.hpp"
#include "kamir/pipeline.hpp"

namespace fs = std::filesystem;
using namespace kamir;

namespace {

std::vector<fs::path> list_wavs(const fs::path &dir) {
  if (!fs::is_directory(dir))
    throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".wav") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw std::runtime_error("no WAV files in " + dir.string());
  return files;
}

AudioSignal concatenate_wavs(const std::vector<fs::path> &files) {
  std::vector<AudioSignal> signals;
  std::int64_t total = 0;
  for (const auto &path : files) {
    signals.push_back(read_wav(path.string()));
    if (signals.back().sample_rate != signals.front().sample_rate)
      throw std::runtime_error("sample rate mismatch in " + path.string());
    total += signals.back().samples.size();
  }
  AudioSignal out;
  out.sample_rate = signals.front().sample_rate;
  out.samples.resize(total);
  std::int64_t at = 0;
  for (const auto &s : signals) {
    out.samples.segment(at, s.samples.size()) = s.samples;
    at += s.samples.size();
  }
  return out;
}

WavFormat parse_wav_format(const std::string &name) {
  if (name == "float32") return WavFormat::kFloat32;
  if (name == "pcm16") return WavFormat::kPcm16;
  throw CLI::ValidationError("--wav-format", "want float32 or pcm16");
}

std::vector<int> parse_grid(const std::string &list) {
  std::vector<int> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  if (out.empty()) throw std::runtime_error("empty grid: " + list);
  return out;
}

fs::path output_dir_for(const std::string &out_dir, const fs::path &input) {
  fs::path dir = out_dir.empty() ? input.parent_path() : fs::path(out_dir);
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  return dir;
}

// Applies CLI overrides on top of defaults/--config values. Only flags
// the user actually passed take effect.
struct ConfigFlags {
  CLI::App *cmd = nullptr;
  int window = 4096, hop = 1024, r1 = 20, r_s = 30, nmf_iters = 200;
  int nmf_patience = 10, margin = 2, k = 10, context = 2;
  double nmf_tol = 1e-5, threshold = 0.15, switch_cost = 0.2, sigma = 1.0;
  std::uint64_t seed = 42;
  bool adaptive_substitution = true, filter_only_flagged = true;
  std::string variant = "v3";

  void attach(CLI::App *app) {
    cmd = app;
    app->add_option("--window", window, "STFT window size in samples");
    app->add_option("--hop", hop, "STFT hop size in samples");
    app->add_option("--r1", r1, "interference dictionary rank");
    app->add_option("--r-s", r_s, "free music templates");
    app->add_option("--nmf-iters", nmf_iters, "max NMF sweeps");
    app->add_option("--nmf-tol", nmf_tol, "NMF early-stop tolerance");
    app->add_option("--nmf-patience", nmf_patience, "NMF early-stop window");
    app->add_option("--seed", seed, "RNG seed");
    app->add_option("--threshold", threshold, "detector threshold");
    app->add_option("--switch-cost", switch_cost, "detector state-change cost");
    app->add_option("--margin", margin, "indicator dilation in frames");
    app->add_option("--k", k, "neighbours per frame");
    app->add_option("--context", context, "temporal extent of the search");
    app->add_option("--sigma", sigma, "frequency smoothing std in bins");
    app->add_option("--adaptive-substitution", adaptive_substitution,
                    "median reads NMF frames where flagged");
    app->add_option("--filter-only-flagged", filter_only_flagged,
                    "median-filter only detected frames");
    app->add_option("--variant", variant,
                    "baseline_kam, v1, v2 or v3 (flag overrides apply)");
  }

  PipelineConfig merge_into(PipelineConfig config) const {
    auto set = [&](const char *flag, auto &target, const auto &value) {
      if (cmd->count(flag)) target = value;
    };
    set("--window", config.window, window);
    set("--hop", config.hop, hop);
    set("--r1", config.r1, r1);
    set("--r-s", config.r_s, r_s);
    set("--nmf-iters", config.nmf_iters, nmf_iters);
    set("--nmf-tol", config.nmf_tol, nmf_tol);
    set("--nmf-patience", config.nmf_patience, nmf_patience);
    set("--seed", config.seed, seed);
    set("--threshold", config.threshold, threshold);
    set("--switch-cost", config.switch_cost, switch_cost);
    set("--margin", config.margin, margin);
    set("--k", config.kernel.k, k);
    set("--context", config.kernel.context, context);
    set("--sigma", config.kernel.sigma, sigma);
    set("--adaptive-substitution", config.kernel.adaptive_substitution,
        adaptive_substitution);
    set("--filter-only-flagged", config.kernel.filter_only_flagged,
        filter_only_flagged);
    if (cmd->count("--variant")) config.variant = parse_variant(variant);
    return config;
  }
};

int cmd_train(const std::string &exemplar_dir, const std::string &out,
              const std::string &csv, int rank, int iters, std::uint64_t seed,
              int window, int hop) {
  const std::vector<fs::path> files = list_wavs(exemplar_dir);
  const AudioSignal all = concatenate_wavs(files);
  std::cout << "training on " << files.size() << " file(s), "
            << all.duration_seconds() << " s of audio\n";

  const MagSpectrogram mag = magnitude(stft(all, window, hop));
  NmfOptions opts;
  opts.max_iters = iters;
  std::vector<double> trace;
  const Dictionary dict = train_dictionary(mag, rank, seed, opts, &trace);
  save_dictionary(out, dict);
  if (!csv.empty()) save_matrix_csv(csv, dict.templates);
  std::cout << "dictionary " << dict.num_bins() << "x" << dict.rank()
            << " written to " << out << " (final divergence "
            << (trace.empty() ? 0.0 : trace.back()) << ", " << trace.size()
            << " sweeps)\n";
  return 0;
}

int cmd_separate(const std::string &input, const std::string &dict_path,
                 const std::string &config_path, const std::string &out_dir,
                 const ConfigFlags &flags, const std::string &wav_format,
                 bool neighbour_dump, bool dump_mags) {
  PipelineConfig config;
  std::string mixture_path = input, dictionary_path = dict_path;
  if (!config_path.empty()) {
    const auto entries = read_key_value_file(config_path);
    config = config_from_entries(entries, config);
    for (const auto &[key, value] : entries) {
      if (key == "input.mixture" && mixture_path.empty()) mixture_path = value;
      if (key == "input.dictionary" && dictionary_path.empty())
        dictionary_path = value;
    }
  }
  config = flags.merge_into(config);
  if (mixture_path.empty())
    throw CLI::ValidationError("--input", "no input given (flag or manifest)");
  if (dictionary_path.empty())
    throw CLI::ValidationError("--dict", "no dictionary given (flag or manifest)");

  const AudioSignal mixture = read_wav(mixture_path);
  const Dictionary dict = load_dictionary(dictionary_path);
  const SeparationRun run =
      run_separation(mixture, dict, config, neighbour_dump);

  const fs::path in_path(mixture_path);
  const fs::path dir = output_dir_for(out_dir, in_path);
  const std::string stem = in_path.stem().string();
  const WavFormat format = parse_wav_format(wav_format);

  RunManifest manifest;
  manifest.inputs["mixture"] = mixture_path;
  manifest.inputs["dictionary"] = dictionary_path;
  manifest.config = config;
  manifest.timings = run.timings;

  auto out_file = [&](const std::string &suffix) {
    return (dir / (stem + suffix)).string();
  };
  write_wav(out_file("_music.wav"), run.separation.music, format);
  manifest.outputs["music"] = out_file("_music.wav");
  write_wav(out_file("_interference.wav"), run.separation.interference, format);
  manifest.outputs["interference"] = out_file("_interference.wav");
  write_indicator_csv(out_file("_indicator.csv"), run.indicator);
  manifest.outputs["indicator"] = out_file("_indicator.csv");
  write_segment_labels(out_file("_detected.txt"), run.indicator,
                       run.separation.music_mag.framing);
  manifest.outputs["labels"] = out_file("_detected.txt");
  if (neighbour_dump) {
    write_neighbour_csv(out_file("_neighbours.csv"), run.neighbourhoods);
    manifest.outputs["neighbours"] = out_file("_neighbours.csv");
  }
  if (dump_mags) {
    save_matrix(out_file("_music_mag.kmx"), run.separation.music_mag.values);
    save_matrix(out_file("_noise_mag.kmx"), run.separation.noise_mag.values);
    manifest.outputs["music_mag"] = out_file("_music_mag.kmx");
    manifest.outputs["noise_mag"] = out_file("_noise_mag.kmx");
  }
  write_manifest(out_file("_manifest.txt"), manifest);

  std::cout << "variant " << variant_name(config.variant) << ": "
            << run.indicator.count_active() << "/" << run.indicator.size()
            << " frames flagged\n";
  for (const auto &t : run.timings)
    std::cout << "  " << t.stage << ": " << t.seconds << " s\n";
  std::cout << "music estimate written to " << manifest.outputs["music"] << "\n";
  return 0;
}

int cmd_evaluate(const std::string &estimate_path, const std::string &clean_path,
                 const std::string &interference_path,
                 const std::string &segments_path, std::string out) {
  const AudioSignal estimate = read_wav(estimate_path);
  const AudioSignal clean = read_wav(clean_path);
  const AudioSignal interference = read_wav(interference_path);
  if (clean.samples.size() != estimate.samples.size() ||
      interference.samples.size() != estimate.samples.size())
    throw std::runtime_error("evaluate: input lengths differ");

  std::vector<Segment> segments;
  if (!segments_path.empty()) segments = read_segments_csv(segments_path);
  const EvalReport report =
      evaluate_separation(estimate, clean, interference, segments);

  if (out.empty())
    out = (fs::path(estimate_path).parent_path() /
           (fs::path(estimate_path).stem().string() + "_report.csv"))
              .string();
  write_report_csv(out, report);
  std::cout << format_report_table(report);
  std::cout << "report written to " << out << "\n";
  return 0;
}

int cmd_synth(const std::string &music_path, const std::string &interference_dir,
              double snr_db, int count, std::uint64_t seed, double target_rms,
              const std::string &out_dir) {
  const AudioSignal music = read_wav(music_path);
  const std::vector<fs::path> files = list_wavs(interference_dir);
  if (count < 0) throw CLI::ValidationError("--count", "must be >= 0");
  if (count > static_cast<int>(files.size()))
    throw std::runtime_error("fewer interference files than events requested");

  // Deterministic event pick and placement from the raw generator
  // stream, so a seed pins the mixture bit for bit.
  std::mt19937_64 rng(seed);
  std::vector<fs::path> picks = files;
  for (std::size_t i = picks.size(); i > 1; --i)
    std::swap(picks[i - 1], picks[rng() % i]);
  picks.resize(count);

  MixSpec spec;
  spec.music = music;
  spec.snr_db = snr_db;
  spec.target_rms = target_rms;
  std::vector<Segment> placed;
  for (const auto &path : picks) {
    InterferenceEvent event;
    event.sound = read_wav(path.string());
    if (event.sound.sample_rate != music.sample_rate)
      throw std::runtime_error("sample rate mismatch in " + path.string());
    const std::int64_t len = event.sound.samples.size();
    const std::int64_t room = music.samples.size() - len;
    if (room < 0)
      throw std::runtime_error("interference longer than the music: " +
                               path.string());
    bool ok = false;
    for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
      const std::int64_t onset =
          static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(room + 1));
      ok = true;
      for (const auto &seg : placed)
        if (onset < seg.end && onset + len > seg.begin) {
          ok = false;
          break;
        }
      if (ok) {
        placed.push_back({onset, onset + len});
        event.onset_seconds = static_cast<double>(onset) / music.sample_rate;
      }
    }
    if (!ok)
      throw std::runtime_error(
          "could not place events without overlap; shorter events or fewer "
          "of them needed");
    spec.events.push_back(std::move(event));
  }

  const MixtureResult mix = synthesize_mixture(spec);
  const fs::path dir = output_dir_for(out_dir, fs::path(music_path));
  const std::string stem = fs::path(music_path).stem().string();
  auto out_file = [&](const std::string &suffix) {
    return (dir / (stem + suffix)).string();
  };
  write_wav(out_file("_mixture.wav"), mix.mixture);
  write_wav(out_file("_clean.wav"), mix.clean_music);
  write_wav(out_file("_interference.wav"), mix.interference_track);
  write_segments_csv(out_file("_segments.csv"), mix.segments,
                     music.sample_rate);

  std::ofstream meta(out_file("_mix_meta.txt"));
  meta.precision(17);
  meta << "music = " << music_path << "\n";
  meta << "snr_db = " << snr_db << "\n";
  meta << "seed = " << seed << "\n";
  meta << "target_rms = " << target_rms << "\n";
  for (std::size_t i = 0; i < spec.events.size(); ++i)
    meta << "event." << i << " = " << picks[i].string() << " onset_sample "
         << mix.segments[i].begin << " gain " << mix.gains[i] << "\n";

  std::cout << count << " event(s) mixed at " << snr_db << " dB into "
            << out_file("_mixture.wav") << "\n";
  return 0;
}

int cmd_sweep(const std::string &input, const std::string &clean_path,
              const std::string &interference_path,
              const std::string &segments_path, const std::string &dict_path,
              const std::string &exemplar_dir, const std::string &r1_grid,
              const std::string &rs_grid, const std::string &k_grid,
              const std::string &c_grid, const std::string &out,
              const ConfigFlags &flags) {
  if (dict_path.empty() == exemplar_dir.empty())
    throw CLI::ValidationError("--dict",
                               "give exactly one of --dict or --exemplars");
  const PipelineConfig base = flags.merge_into(PipelineConfig{});

  const AudioSignal mixture = read_wav(input);
  const AudioSignal clean = read_wav(clean_path);
  const AudioSignal interference = read_wav(interference_path);
  std::vector<Segment> segments;
  if (!segments_path.empty()) segments = read_segments_csv(segments_path);

  const std::vector<int> r1s = exemplar_dir.empty()
                                   ? std::vector<int>{base.r1}
                                   : parse_grid(r1_grid);
  const std::vector<int> rss = parse_grid(rs_grid);
  const std::vector<int> ks = parse_grid(k_grid);
  const std::vector<int> cs = parse_grid(c_grid);

  std::optional<AudioSignal> exemplars;
  if (!exemplar_dir.empty())
    exemplars = concatenate_wavs(list_wavs(exemplar_dir));

  std::ofstream csv(out);
  if (!csv) throw std::runtime_error("cannot create sweep CSV: " + out);
  csv << "r1,r_s,k,c,sdr_db,sir_db,nsdr_db,nsir_db,segment_nsdr_db,"
         "segment_nsir_db\n";
  csv.precision(10);

  double best_score = -1e9;
  std::string best_combo;
  for (int r1 : r1s) {
    Dictionary dict;
    if (exemplars) {
      NmfOptions opts = base.nmf_options();
      dict = train_dictionary(magnitude(stft(*exemplars, base.window, base.hop)),
                              r1, base.seed, opts);
    } else {
      dict = load_dictionary(dict_path);
    }
    for (int rs : rss)
      for (int k : ks)
        for (int c : cs) {
          PipelineConfig config = base;
          config.r1 = r1;
          config.r_s = rs;
          config.kernel.k = k;
          config.kernel.context = c;
          const SeparationRun run = run_separation(mixture, dict, config);
          const EvalReport report = evaluate_separation(
              run.separation.music, clean, interference, segments);
          csv << r1 << "," << rs << "," << k << "," << c << ","
              << report.estimate.sdr_db << "," << report.estimate.sir_db << ","
              << report.nsdr_db << "," << report.nsir_db << ","
              << report.segment_nsdr_db << "," << report.segment_nsir_db
              << "\n";
          const double score =
              segments.empty() ? report.nsdr_db : report.segment_nsdr_db;
          std::ostringstream combo;
          combo << "r1=" << r1 << " r_s=" << rs << " k=" << k << " c=" << c;
          std::cout << combo.str() << ": nsdr " << report.nsdr_db
                    << (segments.empty()
                            ? ""
                            : " segment nsdr " +
                                  std::to_string(report.segment_nsdr_db))
                    << "\n";
          if (score > best_score) {
            best_score = score;
            best_combo = combo.str();
          }
        }
  }
  std::cout << "best: " << best_combo << " (" << best_score << " dB)\n";
  std::cout << "grid written to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Interference reduction for solo music recordings"};
  app.require_subcommand(1);

  // train
  auto *train = app.add_subcommand("train", "train an interference dictionary");
  std::string tr_dir, tr_out, tr_csv;
  int tr_rank = 20, tr_iters = 200, tr_window = 4096, tr_hop = 1024;
  std::uint64_t tr_seed = 42;
  train->add_option("--exemplars", tr_dir, "directory of exemplar WAVs")
      ->required();
  train->add_option("--out", tr_out, "output dictionary (.kmx)")->required();
  train->add_option("--csv", tr_csv, "also export the templates as CSV");
  train->add_option("--rank", tr_rank, "number of templates");
  train->add_option("--iters", tr_iters, "max NMF sweeps");
  train->add_option("--seed", tr_seed, "RNG seed");
  train->add_option("--window", tr_window, "STFT window size");
  train->add_option("--hop", tr_hop, "STFT hop size");

  // separate
  auto *separate = app.add_subcommand("separate", "remove interference from a recording");
  std::string sp_input, sp_dict, sp_config, sp_out_dir, sp_wav_format = "float32";
  bool sp_neighbours = false, sp_dump_mags = false;
  separate->add_option("--input", sp_input, "mixture WAV");
  separate->add_option("--dict", sp_dict, "trained dictionary (.kmx)");
  separate->add_option("--config", sp_config,
                       "key = value config file or a previous run manifest");
  separate->add_option("--out-dir", sp_out_dir, "output directory")
      ->envname("KAMIR_OUT_DIR");
  separate->add_option("--wav-format", sp_wav_format, "float32 or pcm16");
  separate->add_flag("--neighbour-dump", sp_neighbours,
                     "dump per-frame neighbour lists as CSV");
  separate->add_flag("--dump-mags", sp_dump_mags,
                     "dump magnitude estimates as matrix containers");
  ConfigFlags sp_flags;
  sp_flags.attach(separate);

  // evaluate
  auto *evaluate = app.add_subcommand("evaluate", "score a separation against ground truth");
  std::string ev_estimate, ev_clean, ev_interference, ev_segments, ev_out;
  evaluate->add_option("--estimate", ev_estimate, "estimated music WAV")
      ->required();
  evaluate->add_option("--clean", ev_clean, "ground-truth music WAV")
      ->required();
  evaluate->add_option("--interference", ev_interference,
                       "ground-truth interference WAV")
      ->required();
  evaluate->add_option("--segments", ev_segments,
                       "segments CSV from synth (enables segment scores)");
  evaluate->add_option("--out", ev_out, "report CSV path");

  // synth
  auto *synth = app.add_subcommand("synth", "build a test mixture with known stems");
  std::string sy_music, sy_dir, sy_out_dir;
  double sy_snr = 0.0, sy_rms = 0.1;
  int sy_count = 3;
  std::uint64_t sy_seed = 7;
  synth->add_option("--music", sy_music, "music WAV")->required();
  synth->add_option("--interference-dir", sy_dir, "directory of interference WAVs")
      ->required();
  synth->add_option("--snr", sy_snr, "active-segment SNR in dB");
  synth->add_option("--count", sy_count, "number of events");
  synth->add_option("--seed", sy_seed, "placement seed");
  synth->add_option("--target-rms", sy_rms, "music RMS level");
  synth->add_option("--out-dir", sy_out_dir, "output directory")
      ->envname("KAMIR_OUT_DIR");

  // sweep
  auto *sweep = app.add_subcommand("sweep", "grid search over ranks and kernel parameters");
  std::string sw_input, sw_clean, sw_interference, sw_segments, sw_dict,
      sw_exemplars, sw_out = "sweep.csv";
  std::string sw_r1 = "10,20,40", sw_rs = "10,30", sw_k = "5,10,20",
              sw_c = "0,2";
  sweep->add_option("--input", sw_input, "mixture WAV")->required();
  sweep->add_option("--clean", sw_clean, "ground-truth music WAV")->required();
  sweep->add_option("--interference", sw_interference,
                    "ground-truth interference WAV")
      ->required();
  sweep->add_option("--segments", sw_segments, "segments CSV");
  sweep->add_option("--dict", sw_dict, "fixed dictionary (.kmx)");
  sweep->add_option("--exemplars", sw_exemplars,
                    "exemplar directory (retrains per r1)");
  sweep->add_option("--r1-grid", sw_r1, "dictionary ranks, comma separated");
  sweep->add_option("--rs-grid", sw_rs, "free ranks, comma separated");
  sweep->add_option("--k-grid", sw_k, "neighbour counts, comma separated");
  sweep->add_option("--c-grid", sw_c, "context extents, comma separated");
  sweep->add_option("--out", sw_out, "sweep CSV path");
  ConfigFlags sw_flags;
  sw_flags.attach(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed())
      return cmd_train(tr_dir, tr_out, tr_csv, tr_rank, tr_iters, tr_seed,
                       tr_window, tr_hop);
    if (separate->parsed())
      return cmd_separate(sp_input, sp_dict, sp_config, sp_out_dir, sp_flags,
                          sp_wav_format, sp_neighbours, sp_dump_mags);
    if (evaluate->parsed())
      return cmd_evaluate(ev_estimate, ev_clean, ev_interference, ev_segments,
                          ev_out);
    if (synth->parsed())
      return cmd_synth(sy_music, sy_dir, sy_snr, sy_count, sy_seed, sy_rms,
                       sy_out_dir);
    if (sweep->parsed())
      return cmd_sweep(sw_input, sw_clean, sw_interference, sw_segments,
                       sw_dict, sw_exemplars, sw_r1, sw_rs, sw_k, sw_c, sw_out,
                       sw_flags);
  } catch (const CLI::ValidationError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
