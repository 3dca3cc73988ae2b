#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gazenet/nn/adam.hpp"
#include "gazenet/nn/network.hpp"

namespace gazenet::nn {

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 32;
  int epochs = 100;
  // Early stopping on validation loss; 0 disables it.
  int patience = 10;
  // Fraction of the training set held out for early stopping. Ignored for
  // datasets smaller than min_samples_for_validation.
  double validation_fraction = 0.1;
  std::size_t min_samples_for_validation = 10;
  std::uint64_t seed = 1;

  void validate() const;
};

enum class Objective { BinaryCrossEntropy, MeanSquaredError };

struct Example {
  std::vector<double> input;  // channels x length
  double target = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> train_loss;  // per epoch, training mode
  std::vector<double> val_loss;    // per epoch, inference mode (empty without validation)
  int best_epoch = -1;
  int epochs_run = 0;
};

// Mini-batch Adam training. With `init` the run warm-starts from those
// parameters (shape mismatches raise Error(Shape) naming the tensors);
// otherwise parameters are drawn from config.seed. A mini-batch of one sample
// is evaluated as a duplicated pair, which leaves batch statistics and the
// mean loss unchanged while satisfying batch norm's two-sample requirement.
// With early stopping the parameters from the best validation epoch are
// returned. Deterministic for a fixed seed and kernel backend.
TrainResult train(const ModelSpec& spec, const ModelParams* init, std::span<const Example> data,
                  const TrainConfig& config, Objective objective);

// Mean loss in inference mode.
double evaluate_loss(Network& net, std::span<const Example> data, Objective objective);

// Head-activated predictions in inference mode, batched.
std::vector<double> predict_all(Network& net, std::span<const std::vector<double>* const> inputs,
                                std::size_t batch_size = 64);

}  // namespace gazenet::nn
