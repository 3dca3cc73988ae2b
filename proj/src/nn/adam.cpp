#include "gazenet/nn/adam.hpp"

#include <cmath>

#include "gazenet/error.hpp"

namespace gazenet::nn {

void adam_step(std::span<const ParamSlot> slots, AdamState& state, const AdamConfig& config) {
  for (const auto& slot : slots) {
    if (!slot.trainable) continue;
    for (double g : *slot.grad) {
      if (!std::isfinite(g)) fail(ErrorCategory::Numeric, "non-finite gradient in " + slot.name);
    }
  }
  if (state.m.empty()) {
    for (const auto& slot : slots) {
      state.m.emplace_back(slot.value->size(), 0.0);
      state.v.emplace_back(slot.value->size(), 0.0);
    }
  }
  if (state.m.size() != slots.size()) fail(ErrorCategory::Shape, "adam state does not match parameter list");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const auto& slot = slots[s];
    if (!slot.trainable) continue;
    auto& value = *slot.value;
    const auto& grad = *slot.grad;
    auto& m = state.m[s];
    auto& v = state.v[s];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      value[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
    }
  }
}

}  // namespace gazenet::nn
