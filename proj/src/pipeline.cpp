// Copyright 2026 The kamir authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "kamir/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kamir {

namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming> &timings) : timings_(timings) {}
  template <typename F>
  auto run(const std::string &stage, F &&f) {
    const auto start = std::chrono::steady_clock::now();
    auto result = f();
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;
    timings_.push_back({stage, elapsed.count()});
    return result;
  }

 private:
  std::vector<StageTiming> &timings_;
};

bool parse_bool(const std::string &value) {
  if (value == "1" || value == "true" || value == "on") return true;
  if (value == "0" || value == "false" || value == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + value + "'");
}

std::string trim(const std::string &s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kBaselineKam: return "baseline_kam";
    case Variant::kV1: return "v1";
    case Variant::kV2: return "v2";
    case Variant::kV3: return "v3";
  }
  throw std::logic_error("unknown variant");
}

Variant parse_variant(const std::string &name) {
  if (name == "baseline_kam") return Variant::kBaselineKam;
  if (name == "v1") return Variant::kV1;
  if (name == "v2") return Variant::kV2;
  if (name == "v3") return Variant::kV3;
  throw std::invalid_argument("unknown variant '" + name +
                              "' (want baseline_kam, v1, v2 or v3)");
}

EffectiveKernel effective_kernel(const PipelineConfig &config) {
  EffectiveKernel ek;
  ek.kernel = config.kernel;
  switch (config.variant) {
    case Variant::kBaselineKam:
      ek.kernel.filter_only_flagged = false;
      ek.kernel.context = 0;
      ek.kernel.sigma = 0.0;
      ek.kernel.adaptive_substitution = false;
      ek.similarity_on_estimate = false;
      break;
    case Variant::kV1:
      ek.kernel.filter_only_flagged = true;
      ek.kernel.context = 0;
      ek.kernel.sigma = 0.0;
      ek.kernel.adaptive_substitution = false;
      ek.similarity_on_estimate = false;
      break;
    case Variant::kV2:
      ek.kernel.filter_only_flagged = true;
      ek.kernel.sigma = 0.0;
      ek.kernel.adaptive_substitution = false;
      ek.similarity_on_estimate = true;
      break;
    case Variant::kV3:
      ek.similarity_on_estimate = true;
      break;
  }
  return ek;
}

SeparationRun run_separation(const AudioSignal &mixture, const Dictionary &dict,
                             const PipelineConfig &config,
                             bool collect_neighbourhoods) {
  SeparationRun run;
  StageClock clock(run.timings);

  const ComplexSpectrogram spec = clock.run("stft", [&] {
    return stft(mixture, config.window, config.hop);
  });
  if (dict.num_bins() != spec.num_bins())
    throw std::invalid_argument(
        "dictionary bin count does not match the STFT configuration");
  const MagSpectrogram x_bar = magnitude(spec);

  run.decomposition = clock.run("nmf", [&] {
    return semi_supervised_factorize(x_bar, dict, config.r_s, config.seed,
                                     config.nmf_options());
  });

  run.indicator = clock.run("detection", [&] {
    const ActivityCurve curve = activity_curve(run.decomposition.h_fixed);
    const InterferenceIndicator raw =
        decode_indicator(curve, {config.threshold, config.switch_cost});
    return dilate_indicator(raw, config.margin);
  });

  const EffectiveKernel ek = effective_kernel(config);
  const MagSpectrogram s_bar = clock.run("kam", [&] {
    MagSpectrogram x_tilde = x_bar;
    if (ek.similarity_on_estimate)
      x_tilde.values = run.decomposition.music_estimate();
    return estimate_music(x_bar, x_tilde, run.indicator, ek.kernel,
                          collect_neighbourhoods ? &run.neighbourhoods : nullptr);
  });

  run.separation = clock.run("separation", [&] {
    return soft_mask_separate(spec, s_bar);
  });
  return run;
}

std::vector<std::pair<std::string, std::string>> read_key_value_file(
    const std::string &path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    entries.emplace_back(trim(stripped.substr(0, eq)),
                         trim(stripped.substr(eq + 1)));
  }
  return entries;
}

PipelineConfig config_from_entries(
    const std::vector<std::pair<std::string, std::string>> &entries,
    PipelineConfig base) {
  for (const auto &[key, value] : entries) {
    if (key.find('.') != std::string::npos) continue;  // manifest metadata
    try {
      if (key == "window") base.window = std::stoi(value);
      else if (key == "hop") base.hop = std::stoi(value);
      else if (key == "r1") base.r1 = std::stoi(value);
      else if (key == "r_s") base.r_s = std::stoi(value);
      else if (key == "nmf_iters") base.nmf_iters = std::stoi(value);
      else if (key == "nmf_tol") base.nmf_tol = std::stod(value);
      else if (key == "nmf_patience") base.nmf_patience = std::stoi(value);
      else if (key == "seed") base.seed = std::stoull(value);
      else if (key == "threshold") base.threshold = std::stod(value);
      else if (key == "switch_cost") base.switch_cost = std::stod(value);
      else if (key == "margin") base.margin = std::stoi(value);
      else if (key == "k") base.kernel.k = std::stoi(value);
      else if (key == "context") base.kernel.context = std::stoi(value);
      else if (key == "sigma") base.kernel.sigma = std::stod(value);
      else if (key == "adaptive_substitution")
        base.kernel.adaptive_substitution = parse_bool(value);
      else if (key == "filter_only_flagged")
        base.kernel.filter_only_flagged = parse_bool(value);
      else if (key == "variant") base.variant = parse_variant(value);
      else
        throw std::invalid_argument("unknown configuration key '" + key + "'");
    } catch (const std::invalid_argument &) {
      throw;
    } catch (const std::exception &) {
      throw std::invalid_argument("bad value for configuration key '" + key +
                                  "': " + value);
    }
  }
  return base;
}

std::map<std::string, std::string> config_entries(const PipelineConfig &config) {
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  std::map<std::string, std::string> out;
  out["window"] = std::to_string(config.window);
  out["hop"] = std::to_string(config.hop);
  out["r1"] = std::to_string(config.r1);
  out["r_s"] = std::to_string(config.r_s);
  out["nmf_iters"] = std::to_string(config.nmf_iters);
  out["nmf_tol"] = fmt(config.nmf_tol);
  out["nmf_patience"] = std::to_string(config.nmf_patience);
  out["seed"] = std::to_string(config.seed);
  out["threshold"] = fmt(config.threshold);
  out["switch_cost"] = fmt(config.switch_cost);
  out["margin"] = std::to_string(config.margin);
  out["k"] = std::to_string(config.kernel.k);
  out["context"] = std::to_string(config.kernel.context);
  out["sigma"] = fmt(config.kernel.sigma);
  out["adaptive_substitution"] = config.kernel.adaptive_substitution ? "1" : "0";
  out["filter_only_flagged"] = config.kernel.filter_only_flagged ? "1" : "0";
  out["variant"] = variant_name(config.variant);
  return out;
}

void write_manifest(const std::string &path, const RunManifest &manifest) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot create manifest: " + path);
  f << "# run manifest; feed back via --config to reproduce the run\n";
  for (const auto &[key, value] : manifest.inputs)
    f << "input." << key << " = " << value << "\n";
  for (const auto &[key, value] : config_entries(manifest.config))
    f << key << " = " << value << "\n";
  for (const auto &[key, value] : manifest.outputs)
    f << "output." << key << " = " << value << "\n";
  f.precision(6);
  f << std::fixed;
  for (const auto &t : manifest.timings)
    f << "timing." << t.stage << " = " << t.seconds << "\n";
  if (!f) throw std::runtime_error("failed writing manifest: " + path);
}

}  // namespace kamir
