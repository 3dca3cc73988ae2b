#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gazenet/core.hpp"
#include "gazenet/saliency.hpp"

namespace gazenet {

inline constexpr std::size_t kNumChannels = 4;

enum class Channel : std::size_t { Saliency = 0, X = 1, Y = 2, Duration = 3 };

std::string_view channel_name(std::size_t c);

// Per-fixation channels in fixed order [saliency, x_deg, y_deg, duration_ms].
struct FeatureSequence {
  std::string subject_id;
  std::string video_id;
  std::array<std::vector<double>, kNumChannels> channels;

  std::size_t length() const { return channels[0].size(); }
  void validate() const;
};

// Saliency values for a scanpath, one per fixation, read from the centre
// frame of each fixation.
std::vector<double> extract_scanpath_saliency(const Scanpath& sp, SaliencyStore& store, const ScreenGeometry& g,
                                              const ExtractionMaskSpec& spec);

// Builds the feature sequence from a scanpath and its per-fixation saliency.
FeatureSequence assemble(const Scanpath& sp, std::span<const double> saliency);

// Convenience overload that extracts saliency from the raster store first.
FeatureSequence assemble(const Scanpath& sp, SaliencyStore& store, const ScreenGeometry& g,
                         const ExtractionMaskSpec& spec);

inline constexpr double kStdFloor = 1e-8;

struct ChannelStats {
  std::array<double, kNumChannels> mean{};
  std::array<double, kNumChannels> stddev{};
  // Identifies the training split the statistics were fitted on.
  std::string fitted_on;
};

// Pooled per-channel mean and population standard deviation over every
// fixation of every training sequence.
ChannelStats fit_stats(std::span<const FeatureSequence> train, std::string fitted_on = {});

// Canonical identifier for a training split: a hash over its sorted subject ids.
std::string split_identifier(std::vector<std::string> subject_ids);

struct ModelInput {
  std::size_t length = 0;       // L
  std::size_t true_length = 0;  // min(M, L)
  std::vector<double> values;   // kNumChannels x L, row-major

  double at(std::size_t channel, std::size_t t) const { return values[channel * length + t]; }
};

// z-scores each channel with `stats`, then right-pads with zeros or truncates
// to `length` fixations.
ModelInput normalize_and_fit_length(const FeatureSequence& f, const ChannelStats& stats, std::size_t length);

// Zeroes one channel of a model input (channel ablation).
void mask_channel(ModelInput& input, std::size_t channel);

// FEAT1 tensor file. The header line is
// `<subject> <video> 4 <L> true_length=<n>[ delta=<d>]`.
struct FeatureTensorFile {
  std::string subject_id;
  std::string video_id;
  std::size_t length = 0;
  std::size_t true_length = 0;
  std::vector<double> values;  // 4 x L
  bool has_delta = false;
  double delta = 0.0;
};

void write_feature_tensor(const std::filesystem::path& path, const FeatureTensorFile& t);
FeatureTensorFile read_feature_tensor(const std::filesystem::path& path);

// Raw (un-normalized) sequences are cached with L = M.
FeatureTensorFile to_tensor_file(const FeatureSequence& f);
FeatureSequence from_tensor_file(const FeatureTensorFile& t);

}  // namespace gazenet
