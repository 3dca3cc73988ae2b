#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "gazenet/core.hpp"

namespace gazenet::pipeline {

// Synthetic free-viewing dataset. Each subject has a latent severity a:
// ADHD ~ N(1, severity_sd), control ~ N(0, severity_sd), pre-training
// subjects ~ N(0.5, 0.5) with SWAN score a + N(0, swan_noise_sd). Effects are
// in standard deviations of the per-fixation quantity: fixation durations
// shift by -effect_duration * a SDs, and the probability of fixating a
// salient blob drops by effect_saliency * a SDs of the targeting indicator.
// Every subject also gets a random offset of subject_jitter_sd on both.
struct SynthSpec {
  int n_adhd = 20;
  int n_control = 20;
  int n_pretrain = 0;
  double effect_duration = 1.5;
  double effect_saliency = 1.5;
  double severity_sd = 0.3;
  double subject_jitter_sd = 0.5;
  double swan_noise_sd = 0.25;
  std::string video_id = "synth";
  int frames = 200;
  double fps = 10.0;
  double sampling_rate_hz = 60.0;
  int raster_width = 48;
  int raster_height = 27;
  ScreenGeometry screen;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthSummary {
  std::filesystem::path manifest;
  // Planted fixation count per subject id.
  std::map<std::string, int> planted_fixations;
};

// Writes manifest.txt, labels.csv, planted.csv, gaze/<subject>.csv and
// saliency/<video>/frame_<i>.salr under `dir`. Deterministic per seed.
SynthSummary generate_synthetic(const SynthSpec& spec, const std::filesystem::path& dir);

}  // namespace gazenet::pipeline
