#include "gazenet/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "gazenet/error.hpp"

namespace gazenet::nn {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_loss(double p, double y) {
  const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

double bce_grad(double p, double y) {
  const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return -y / q + (1.0 - y) / (1.0 - q);
}

double mse_loss(double prediction, double target) {
  const double d = prediction - target;
  return d * d;
}

double mse_grad(double prediction, double target) { return 2.0 * (prediction - target); }

LossResult bce_from_logits(std::span<const double> logits, std::span<const double> targets) {
  if (logits.size() != targets.size() || logits.empty()) fail(ErrorCategory::Shape, "bce: size mismatch");
  LossResult r;
  r.grad_logits.resize(logits.size());
  const double inv_n = 1.0 / static_cast<double>(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = sigmoid(logits[i]);
    r.loss += bce_loss(p, targets[i]);
    r.grad_logits[i] = (p - targets[i]) * inv_n;
  }
  r.loss *= inv_n;
  return r;
}

LossResult mse_from_outputs(std::span<const double> outputs, std::span<const double> targets) {
  if (outputs.size() != targets.size() || outputs.empty()) fail(ErrorCategory::Shape, "mse: size mismatch");
  LossResult r;
  r.grad_logits.resize(outputs.size());
  const double inv_n = 1.0 / static_cast<double>(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    r.loss += mse_loss(outputs[i], targets[i]);
    r.grad_logits[i] = mse_grad(outputs[i], targets[i]) * inv_n;
  }
  r.loss *= inv_n;
  return r;
}

}  // namespace gazenet::nn
