#pragma once

#include <span>
#include <vector>

namespace gazenet::nn {

inline constexpr double kProbClamp = 1e-7;

double sigmoid(double z);

// Binary cross-entropy with p clamped to [1e-7, 1 - 1e-7].
double bce_loss(double p, double y);
// d bce / d p at the clamped probability.
double bce_grad(double p, double y);

double mse_loss(double prediction, double target);
double mse_grad(double prediction, double target);

struct LossResult {
  double loss = 0.0;                 // mean over the batch
  std::vector<double> grad_logits;   // d(mean loss) / d logit, per sample
};

// Sigmoid head + BCE on raw logits. The logit gradient uses the fused form
// (sigmoid(z) - y) / n.
LossResult bce_from_logits(std::span<const double> logits, std::span<const double> targets);

// Linear head + MSE.
LossResult mse_from_outputs(std::span<const double> outputs, std::span<const double> targets);

}  // namespace gazenet::nn
