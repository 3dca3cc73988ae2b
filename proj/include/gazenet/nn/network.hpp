#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gazenet/nn/layers.hpp"
#include "gazenet/nn/model_spec.hpp"
#include "gazenet/nn/tensor.hpp"

namespace gazenet::nn {

// The CNN described by a ModelSpec. forward() returns the pre-activation
// output of the single head unit (the logit for a sigmoid head).
class Network {
 public:
  // Parameters are initialized from `seed`: He-uniform weights
  // U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases, identity batch norm.
  Network(const ModelSpec& spec, std::uint64_t seed);
  Network(const ModelSpec& spec, const ModelParams& params);

  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const ModelSpec& spec() const { return spec_; }

  Batch forward(const Batch& x, Mode mode, Rng* rng = nullptr);
  // Propagates d loss / d output back through every layer; parameter
  // gradients accumulate until zero_grad().
  Batch backward(const Batch& grad_output);
  void zero_grad();

  // Inference-mode activations after every layer; the last entry is the head
  // pre-activation.
  std::vector<Batch> forward_trace(const Batch& x);

  // Head activation applied to forward(): probabilities for a sigmoid head,
  // raw outputs for a linear head.
  std::vector<double> predict(const Batch& x);

  std::vector<ParamSlot> slots();
  ModelParams export_params() const;
  // Throws Error(Shape) listing every tensor whose name or shape differs.
  void import_params(const ModelParams& params);

  std::size_t layer_count() const { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }
  Layer& layer(std::size_t i) { return *layers_[i]; }
  // Name prefix of the parameter-bearing layer i ("conv0", "bn0", "dense0", "head").
  const std::string& layer_name(std::size_t i) const { return names_[i]; }

 private:
  void build();

  ModelSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<std::string> names_;
};

// Packs fixed-shape inputs (each channels x length, row-major) into a batch.
Batch make_batch(std::span<const std::vector<double>* const> inputs, std::size_t channels, std::size_t length);
Batch make_batch(const std::vector<std::vector<double>>& inputs, std::size_t channels, std::size_t length);

enum class HeadInit { Reuse, Reinitialize };

struct TransferReport {
  std::vector<std::string> copied;         // tensors copied unchanged
  std::vector<std::string> reinitialized;  // head tensors drawn fresh (Reinitialize mode)
  bool all_copied_equal = true;            // element-wise equality audit
};

struct TransferResult {
  ModelSpec spec;
  ModelParams params;
  TransferReport report;
};

// Moves a trained model onto a different head activation. Every non-head
// tensor is copied; the head tensors are reused (default) or re-drawn from
// `seed`. The target spec must equal the source spec except for `head`.
TransferResult transfer_head(const ModelSpec& source_spec, const ModelParams& source, const ModelSpec& target_spec,
                             HeadInit mode = HeadInit::Reuse, std::uint64_t seed = 0);

}  // namespace gazenet::nn
