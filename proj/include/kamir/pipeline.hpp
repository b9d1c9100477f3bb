// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef KAMIR_PIPELINE_HPP_
#define KAMIR_PIPELINE_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kamir/detection.hpp"
#include "kamir/kam.hpp"
#include "kamir/nmf.hpp"
#include "kamir/separation.hpp"

namespace kamir {

// Ablation variants. baseline_kam is plain median-filter KAM over every
// frame; v1 adds the detector and filters only flagged frames; v2 runs
// the similarity search on the NMF music estimate with temporal
// context; v3 additionally enables adaptive frame substitution and
// frequency smoothing (the full method).
enum class Variant { kBaselineKam, kV1, kV2, kV3 };

std::string variant_name(Variant v);
Variant parse_variant(const std::string &name);

struct PipelineConfig {
  int window = 4096;
  int hop = 1024;

  int r1 = 20;               // interference templates (training)
  int r_s = 30;              // free music templates
  int nmf_iters = 200;
  double nmf_tol = 1e-5;
  int nmf_patience = 10;
  std::uint64_t seed = 42;

  double threshold = 0.15;   // detector threshold on normalized activity
  double switch_cost = 0.2;  // detector state-change cost
  int margin = 2;            // indicator dilation, frames

  KernelConfig kernel;       // K, C, sigma, substitution, flagged-only
  Variant variant = Variant::kV3;

  NmfOptions nmf_options() const {
    return {nmf_iters, nmf_tol, nmf_patience};
  }
};

// The kernel configuration a variant actually runs with, plus whether
// the similarity search uses the NMF music estimate or the mixture.
struct EffectiveKernel {
  KernelConfig kernel;
  bool similarity_on_estimate = true;
};

EffectiveKernel effective_kernel(const PipelineConfig &config);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct SeparationRun {
  SeparationResult separation;
  InterferenceIndicator indicator;  // after dilation
  SemiSupervisedDecomposition decomposition;
  std::vector<Neighbourhood> neighbourhoods;  // filled on request
  std::vector<StageTiming> timings;
};

// Full method: stft -> semi-supervised NMF -> activity decoding ->
// kernel median filtering -> soft masking -> resynthesis.
SeparationRun run_separation(const AudioSignal &mixture, const Dictionary &dict,
                             const PipelineConfig &config,
                             bool collect_neighbourhoods = false);

// Flat key = value configuration file support. Lines starting with '#'
// are comments. Dotted keys (input.*, output.*, timing.*) are manifest
// metadata and are ignored by the config parser, so a run manifest can
// be fed back in as a config file.
std::vector<std::pair<std::string, std::string>> read_key_value_file(
    const std::string &path);
PipelineConfig config_from_entries(
    const std::vector<std::pair<std::string, std::string>> &entries,
    PipelineConfig base = {});
std::map<std::string, std::string> config_entries(const PipelineConfig &config);

struct RunManifest {
  std::map<std::string, std::string> inputs;    // input.<name> = path
  PipelineConfig config;
  std::map<std::string, std::string> outputs;   // output.<name> = path
  std::vector<StageTiming> timings;
};

void write_manifest(const std::string &path, const RunManifest &manifest);

}  // namespace kamir

#endif  // KAMIR_PIPELINE_HPP_
