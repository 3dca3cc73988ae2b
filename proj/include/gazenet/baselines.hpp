#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gazenet/core.hpp"

namespace gazenet::baselines {

// Symbol alphabet for ROI cells, in row-major cell order.
inline constexpr std::string_view kRoiAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

// Uniform rows x cols grid over the screen. Cell 0 is top-left.
struct RoiGrid {
  int rows = 4;
  int cols = 4;
  ScreenGeometry screen;

  void validate() const;
  // Cell index of a fixation; positions off screen clamp to the nearest cell.
  int cell(double x_deg, double y_deg) const;
  char symbol(int cell) const { return kRoiAlphabet[static_cast<std::size_t>(cell)]; }
};

// One symbol per fixation, no run-length collapsing.
std::string encode_scanpath(const Scanpath& sp, const RoiGrid& grid);

// Unit-cost edit distance.
std::size_t levenshtein(std::string_view a, std::string_view b);

// Mean distance to the control set minus mean distance to the ADHD set;
// positive means closer to the ADHD group.
double levenshtein_classify(std::string_view query, std::span<const std::string> adhd,
                            std::span<const std::string> control);

// Symbol strings, one subject per line: `<subject_id> <symbols>`.
std::string symbol_strings_text(std::span<const std::string> subject_ids, std::span<const std::string> symbols);

// Engineered gaze features over a whole video. The vector is 16 base
// statistics over all fixations, then the same 16 over the first third of the
// viewing time, then over the remaining two thirds.
inline constexpr std::size_t kBaseFeatureCount = 16;
inline constexpr std::size_t kEngineeredFeatureCount = 3 * kBaseFeatureCount;
// Fraction of the onset span (first to last fixation onset) that forms the
// "first" segment of the temporal split.
inline constexpr double kFirstSegmentFraction = 1.0 / 3.0;

const std::vector<std::string>& engineered_feature_names();

struct EngineeredFeatures {
  std::vector<double> values;  // kEngineeredFeatureCount
  // Set where a statistic had no data (e.g. no saccade inside a segment)
  // and 0 was substituted.
  std::vector<bool> empty;

  bool any_empty() const;
};

// `saliency` holds one value per fixation. Saccade duration is the gap from
// fixation end to the next onset, floored at `sample_period_ms`; the peak
// velocity proxy is amplitude over duration in degrees per second.
EngineeredFeatures extract_engineered_features(const Scanpath& sp, std::span<const double> saliency,
                                               double sample_period_ms);

// `subject_id,video_id,<feature names...>,empty_count`
std::string engineered_csv_header();
std::string engineered_csv_row(const std::string& subject_id, const std::string& video_id,
                               const EngineeredFeatures& f);

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // population std floored at 1e-8

  static Standardizer fit(std::span<const std::vector<double>> rows);
  std::vector<double> apply(std::span<const double> row) const;
};

struct SvmConfig {
  double lambda = 1e-2;
  double eta0 = 0.1;
  int epochs = 60;
  std::uint64_t seed = 1;
};

struct LinearSvm {
  std::vector<double> weights;
  double bias = 0.0;

  double decision(std::span<const double> x) const;
};

// Hinge loss with L2 penalty (bias unpenalized), stochastic subgradient
// descent with step eta0 / (1 + eta0 * lambda * t). The visiting order
// depends only on the seed, never on labels, so flipping every label negates
// the learned function exactly. Labels are 0/1. Only features with
// mask[j] = true are used; the others keep weight 0.
LinearSvm train_linear_svm(std::span<const std::vector<double>> x, std::span<const int> labels,
                           const std::vector<bool>& mask, const SvmConfig& config);

struct RfeConfig {
  double step_fraction = 0.2;
  double inner_validation_fraction = 0.25;
  SvmConfig svm;
};

struct RfeRound {
  std::size_t n_features = 0;
  double inner_auc = 0.0;
};

struct SvmRfeModel {
  Standardizer standardizer;
  LinearSvm svm;
  std::vector<bool> mask;
  std::vector<RfeRound> rounds;
  // Feature indices in the order they were eliminated.
  std::vector<std::size_t> elimination_order;

  double decision(std::span<const double> raw) const;
};

// Standardizes with training statistics, then runs recursive feature
// elimination: each round drops max(1, floor(step * remaining)) features of
// smallest |weight| (never the last one) and records the AUC on a stratified
// inner validation split. The mask with the best inner AUC (earliest on ties)
// is retrained on the full training set.
SvmRfeModel svm_rfe_train(std::span<const std::vector<double>> x, std::span<const int> labels,
                          const RfeConfig& config);

}  // namespace gazenet::baselines
