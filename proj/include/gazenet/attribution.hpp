#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gazenet/features.hpp"
#include "gazenet/nn/layers.hpp"
#include "gazenet/nn/model_spec.hpp"
#include "gazenet/nn/tensor.hpp"

namespace gazenet::attribution {

// Below this |delta input| the Rescale multiplier falls back to the gradient.
inline constexpr double kRescaleEpsilon = 1e-7;

struct ConvOp {
  nn::Conv1d layer;
};
// Per-channel y = scale * x + shift (batch norm folded with running statistics).
struct AffineOp {
  std::vector<double> scale;
  std::vector<double> shift;
};
struct ReluOp {};
struct PoolOp {
  nn::PoolKind kind = nn::PoolKind::Average;
};
struct DenseOp {
  nn::Dense layer;
};
using Op = std::variant<ConvOp, AffineOp, ReluOp, PoolOp, DenseOp>;

// Deterministic inference graph with a single scalar output (the head
// pre-activation). Dropout is absent and batch norm is folded into AffineOp.
class InferenceGraph {
 public:
  InferenceGraph(std::size_t input_channels, std::size_t input_length)
      : channels_(input_channels), length_(input_length) {}

  static InferenceGraph fold(const nn::ModelSpec& spec, const nn::ModelParams& params);

  void add(Op op) { ops_.push_back(std::move(op)); }
  const std::vector<Op>& ops() const { return ops_; }
  std::size_t input_channels() const { return channels_; }
  std::size_t input_length() const { return length_; }

  // Scalar output for one input of size channels x length.
  double forward(std::span<const double> x);

  struct Result {
    std::vector<double> attributions;  // channels x length
    std::vector<double> multipliers;   // d(output) / d(input) under the Rescale rule
    double output = 0.0;
    double reference_output = 0.0;
  };

  // DeepLIFT Rescale: multipliers are chained back from the output; every
  // ReLU uses delta(out) / delta(in) against the reference, and each max pool
  // window is decomposed as max(a, b) = b + relu(a - b) so summation-to-delta
  // holds exactly up to rounding.
  Result deeplift(std::span<const double> x, std::span<const double> reference);

 private:
  std::vector<nn::Batch> run(std::span<const double> x);

  std::size_t channels_;
  std::size_t length_;
  std::vector<Op> ops_;
};

struct AttributionMap {
  std::string subject_id;
  std::string video_id;
  std::size_t length = 0;
  std::size_t true_length = 0;
  std::vector<double> values;     // kNumChannels x length
  std::vector<double> reference;  // kNumChannels x length
  double output_delta = 0.0;      // f(x) - f(reference), on the logit

  double at(std::size_t channel, std::size_t t) const { return values[channel * length + t]; }
};

// Attribution of one model input against `reference` (all zeros when empty,
// i.e. the per-channel training mean in normalized space).
AttributionMap deeplift_attribute(InferenceGraph& graph, const ModelInput& input, std::span<const double> reference,
                                  std::string subject_id = {}, std::string video_id = {});

// |a| then min-max over the unpadded positions of every channel; constant
// maps become all zeros and padded positions stay zero.
AttributionMap normalize_instance(const AttributionMap& a);

struct BoxSummary {
  double median = 0.0;
  double mean = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double lo_whisker = 0.0;  // smallest value >= q1 - 1.5 IQR
  double hi_whisker = 0.0;  // largest value <= q3 + 1.5 IQR
  std::size_t count = 0;
};

// Box-plot statistics of a sample; quartiles by linear interpolation between
// order statistics.
BoxSummary summarize_box(std::vector<double> values);

// Per-channel summaries pooled over the unpadded positions of every map.
std::array<BoxSummary, kNumChannels> aggregate_channel_relevance(std::span<const AttributionMap> maps);

// Rows `video,channel,median,mean,q1,q3,lo_whisker,hi_whisker`.
std::string box_plot_csv_header();
std::string box_plot_csv_rows(const std::string& video_id, const std::array<BoxSummary, kNumChannels>& summaries);

// FEAT1 layout with a `delta=` header field.
void write_attribution_dump(const std::filesystem::path& path, const AttributionMap& a);

}  // namespace gazenet::attribution
