#pragma once

#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gazenet/nn/model_spec.hpp"
#include "gazenet/nn/tensor.hpp"

namespace gazenet::nn {

enum class Mode { Train, Infer };

using Rng = std::mt19937_64;

// Mutable view of one parameter tensor and its gradient accumulator.
struct ParamSlot {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double>* value = nullptr;
  std::vector<double>* grad = nullptr;
  bool trainable = true;
};

// A differentiable layer. forward() caches what backward() needs, so one
// instance must not be shared between concurrent passes. backward()
// accumulates parameter gradients and returns the input gradient.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string_view kind() const = 0;
  virtual Batch forward(const Batch& x, Mode mode, Rng* rng) = 0;
  virtual Batch backward(const Batch& grad_out) = 0;
  virtual std::vector<ParamSlot> params() { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;
};

class Conv1d final : public Layer {
 public:
  Conv1d(std::size_t in_channels, std::size_t filters, std::size_t kernel, std::size_t stride);

  std::string_view kind() const override { return "conv1d"; }
  Batch forward(const Batch& x, Mode mode, Rng* rng) override;
  Batch backward(const Batch& grad_out) override;
  std::vector<ParamSlot> params() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1d>(*this); }

  std::size_t in_channels() const { return in_; }
  std::size_t filters() const { return out_; }
  std::size_t kernel() const { return k_; }
  std::size_t stride() const { return s_; }
  // filters x in_channels x kernel
  std::vector<double>& weight() { return w_; }
  std::vector<double>& bias() { return b_; }
  const std::vector<double>& weight() const { return w_; }
  const std::vector<double>& bias() const { return b_; }

 private:
  std::size_t in_, out_, k_, s_;
  std::vector<double> w_, b_, dw_, db_;
  Batch x_;
};

class ReLU final : public Layer {
 public:
  std::string_view kind() const override { return "relu"; }
  Batch forward(const Batch& x, Mode mode, Rng* rng) override;
  Batch backward(const Batch& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<ReLU>(*this); }

 private:
  Batch x_;
};

// Per-channel normalization over (samples, steps). Training mode uses batch
// statistics and updates the running estimates with the given momentum;
// inference mode uses the running estimates.
class BatchNorm1d final : public Layer {
 public:
  explicit BatchNorm1d(std::size_t channels, double momentum = 0.9, double eps = 1e-5);

  std::string_view kind() const override { return "batchnorm"; }
  Batch forward(const Batch& x, Mode mode, Rng* rng) override;
  Batch backward(const Batch& grad_out) override;
  std::vector<ParamSlot> params() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm1d>(*this); }

  std::size_t channels() const { return c_; }
  double eps() const { return eps_; }
  std::vector<double>& gamma() { return gamma_; }
  std::vector<double>& beta() { return beta_; }
  std::vector<double>& running_mean() { return rmean_; }
  std::vector<double>& running_var() { return rvar_; }
  const std::vector<double>& gamma() const { return gamma_; }
  const std::vector<double>& beta() const { return beta_; }
  const std::vector<double>& running_mean() const { return rmean_; }
  const std::vector<double>& running_var() const { return rvar_; }

 private:
  std::size_t c_;
  double momentum_, eps_;
  std::vector<double> gamma_, beta_, rmean_, rvar_;
  std::vector<double> dgamma_, dbeta_, drmean_, drvar_;
  Mode mode_ = Mode::Infer;
  Batch xhat_;
  std::vector<double> inv_std_;
};

// Non-overlapping pooling with window and stride 2; an odd tail is dropped.
class Pool1d final : public Layer {
 public:
  explicit Pool1d(PoolKind kind) : kind_(kind) {}

  std::string_view kind() const override { return kind_ == PoolKind::Average ? "avgpool" : "maxpool"; }
  Batch forward(const Batch& x, Mode mode, Rng* rng) override;
  Batch backward(const Batch& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Pool1d>(*this); }

  PoolKind pool_kind() const { return kind_; }

 private:
  PoolKind kind_;
  std::size_t in_t_ = 0;
  std::vector<unsigned char> argmax_;
};

// Inverted dropout; identity in inference mode.
class Dropout final : public Layer {
 public:
  explicit Dropout(double rate);

  std::string_view kind() const override { return "dropout"; }
  Batch forward(const Batch& x, Mode mode, Rng* rng) override;
  Batch backward(const Batch& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }

  double rate() const { return rate_; }
  // Mask applied by the last training-mode forward (keep-scaled), for tests.
  const std::vector<double>& last_mask() const { return mask_; }

 private:
  double rate_;
  std::vector<double> mask_;
};

// Fully connected layer over the flattened sample; output is n x units x 1.
class Dense final : public Layer {
 public:
  Dense(std::size_t inputs, std::size_t units);

  std::string_view kind() const override { return "dense"; }
  Batch forward(const Batch& x, Mode mode, Rng* rng) override;
  Batch backward(const Batch& grad_out) override;
  std::vector<ParamSlot> params() override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

  std::size_t inputs() const { return in_; }
  std::size_t units() const { return out_; }
  // units x inputs
  std::vector<double>& weight() { return w_; }
  std::vector<double>& bias() { return b_; }
  const std::vector<double>& weight() const { return w_; }
  const std::vector<double>& bias() const { return b_; }

 private:
  std::size_t in_, out_;
  std::vector<double> w_, b_, dw_, db_;
  Batch x_;
};

}  // namespace gazenet::nn
