#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gazenet/features.hpp"
#include "gazenet/nn/model_spec.hpp"
#include "gazenet/nn/network.hpp"
#include "gazenet/nn/train.hpp"
#include "gazenet/pipeline/config.hpp"

namespace gazenet::pipeline {

inline const std::vector<std::string> kCommands{
    "detect", "saliency-extract", "features",      "pretrain",     "finetune",   "train-scratch", "evaluate",
    "attribute", "baseline-lev",  "baseline-svm",  "hypersearch",  "synth",      "report"};

struct CommandOptions {
  std::string command;
  std::optional<std::uint64_t> seed;
  std::filesystem::path config_file;
  std::filesystem::path manifest;
  std::filesystem::path out;
  std::vector<std::string> overrides;  // key=value
  // evaluate: registered model ids; empty means cnn-scratch and cnn-pretrained.
  std::vector<std::string> models;
  // evaluate: also run the channel ablation variants.
  bool ablation = false;
  // attribute: which trained model to explain (finetune or scratch).
  std::string attribute_model = "finetune";
  // Restrict model-fitting commands to one video; empty means all.
  std::string video;
};

using Logger = std::function<void(const std::string&)>;

// Resolves the configuration, validates the manifest, locks the workspace,
// runs the command and writes `logs/<command>.log` with the configuration
// hash, seed and output hashes. Returns the files written.
std::vector<std::filesystem::path> run_command(const CommandOptions& options, const Logger& log = {});

// Model ids accepted by evaluate.
inline constexpr const char* kCnnScratch = "cnn-scratch";
inline constexpr const char* kCnnPretrained = "cnn-pretrained";
inline constexpr const char* kLevenshtein = "levenshtein";
inline constexpr const char* kSvmRfe = "svm-rfe";

// Channel sets zeroed by the ablation variants, keyed by suffix.
struct Ablation {
  std::string suffix;  // "wo-saliency", "wo-duration", "wo-location"
  std::string label;   // report column title
  std::vector<std::size_t> channels;
};
const std::vector<Ablation>& ablations();

// Pieces shared with tests.
nn::ModelSpec model_spec_from_config(const Config& c, nn::HeadKind head);
nn::TrainConfig train_config_from(const Config& c, std::uint64_t seed, const std::string& epochs_key);

// Fits normalization on `train`, trains a classifier (from scratch or from
// a pre-trained regression model) and returns probabilities for `test`.
struct CnnFoldSetup {
  nn::ModelSpec spec;  // sigmoid head
  nn::TrainConfig train;
  const nn::ModelParams* pretrained = nullptr;  // linear-head parameters
  nn::HeadInit head_init = nn::HeadInit::Reuse;
  std::vector<std::size_t> masked_channels;
};
std::vector<double> cnn_fit_and_score(const CnnFoldSetup& setup, std::span<const FeatureSequence* const> train,
                                      std::span<const int> train_labels,
                                      std::span<const FeatureSequence* const> test);

}  // namespace gazenet::pipeline
