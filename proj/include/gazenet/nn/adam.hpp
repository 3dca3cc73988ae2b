#pragma once

#include <span>
#include <vector>

#include "gazenet/nn/layers.hpp"

namespace gazenet::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  long step = 0;
};

// One bias-corrected Adam update over the trainable slots. All gradients are
// checked before any parameter changes; a non-finite gradient raises
// Error(Numeric) naming the tensor.
void adam_step(std::span<const ParamSlot> slots, AdamState& state, const AdamConfig& config);

}  // namespace gazenet::nn
