#include "gazenet/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gazenet/error.hpp"
#include "gazenet/nn/loss.hpp"

namespace gazenet::nn {

namespace {

LossResult compute_loss(const Batch& out, std::span<const double> targets, Objective objective) {
  const std::span<const double> outputs(out.v.data(), out.v.size());
  return objective == Objective::BinaryCrossEntropy ? bce_from_logits(outputs, targets)
                                                    : mse_from_outputs(outputs, targets);
}

Batch gather(std::span<const Example> data, std::span<const std::size_t> idx, const ModelSpec& spec,
             std::vector<double>& targets) {
  std::vector<const std::vector<double>*> inputs;
  targets.clear();
  for (std::size_t i : idx) {
    inputs.push_back(&data[i].input);
    targets.push_back(data[i].target);
  }
  return make_batch(std::span<const std::vector<double>* const>(inputs), static_cast<std::size_t>(spec.input_channels),
                    static_cast<std::size_t>(spec.input_length));
}

}  // namespace

void TrainConfig::validate() const {
  if (!(adam.learning_rate > 0) || !(adam.beta1 > 0 && adam.beta1 < 1) || !(adam.beta2 > 0 && adam.beta2 < 1) ||
      !(adam.epsilon > 0)) {
    fail(ErrorCategory::Config, "Adam hyperparameters out of range");
  }
  if (batch_size == 0) fail(ErrorCategory::Config, "batch_size must be positive");
  if (epochs < 0 || patience < 0) fail(ErrorCategory::Config, "epochs and patience must be non-negative");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    fail(ErrorCategory::Config, "validation_fraction must lie in [0, 1)");
  }
}

double evaluate_loss(Network& net, std::span<const Example> data, Objective objective) {
  double total = 0.0;
  const std::size_t chunk = 64;
  std::vector<std::size_t> idx;
  std::vector<double> targets;
  for (std::size_t start = 0; start < data.size(); start += chunk) {
    idx.clear();
    for (std::size_t i = start; i < std::min(data.size(), start + chunk); ++i) idx.push_back(i);
    const Batch x = gather(data, idx, net.spec(), targets);
    const Batch out = net.forward(x, Mode::Infer, nullptr);
    total += compute_loss(out, targets, objective).loss * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(data.size());
}

std::vector<double> predict_all(Network& net, std::span<const std::vector<double>* const> inputs,
                                std::size_t batch_size) {
  std::vector<double> out;
  out.reserve(inputs.size());
  const auto c = static_cast<std::size_t>(net.spec().input_channels);
  const auto l = static_cast<std::size_t>(net.spec().input_length);
  for (std::size_t start = 0; start < inputs.size(); start += batch_size) {
    const auto count = std::min(batch_size, inputs.size() - start);
    const auto preds = net.predict(make_batch(inputs.subspan(start, count), c, l));
    out.insert(out.end(), preds.begin(), preds.end());
  }
  return out;
}

TrainResult train(const ModelSpec& spec, const ModelParams* init, std::span<const Example> data,
                  const TrainConfig& config, Objective objective) {
  config.validate();
  if (data.empty()) fail(ErrorCategory::InvalidArgument, "train: dataset is empty");
  const bool wants_sigmoid = objective == Objective::BinaryCrossEntropy;
  if (wants_sigmoid != (spec.head == HeadKind::Sigmoid)) {
    fail(ErrorCategory::Config, "train: BCE needs a sigmoid head and MSE a linear head");
  }

  Network net = init ? Network(spec, *init) : Network(spec, config.seed);
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> val_idx;
  if (config.validation_fraction > 0 && config.patience > 0 && data.size() >= config.min_samples_for_validation) {
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(config.validation_fraction * static_cast<double>(data.size()))));
    val_idx.assign(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
    order.resize(order.size() - n_val);
    std::sort(val_idx.begin(), val_idx.end());
  }
  std::vector<Example> val_set;
  for (std::size_t i : val_idx) val_set.push_back(data[i]);

  TrainResult result;
  result.params = net.export_params();
  AdamState adam;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::vector<double> targets;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto count = std::min(config.batch_size, order.size() - start);
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(start + count));
      if (idx.size() == 1) idx.push_back(idx.front());
      const Batch x = gather(data, idx, spec, targets);
      net.zero_grad();
      const Batch out = net.forward(x, Mode::Train, &rng);
      const LossResult loss = compute_loss(out, targets, objective);
      Batch grad(out.n, out.c, out.t);
      grad.v = loss.grad_logits;
      net.backward(grad);
      auto slots = net.slots();
      adam_step(slots, adam, config.adam);
      epoch_loss += loss.loss * static_cast<double>(count);
    }
    result.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    result.epochs_run = epoch + 1;

    if (!val_set.empty()) {
      const double v = evaluate_loss(net, val_set, objective);
      result.val_loss.push_back(v);
      if (v < best_val) {
        best_val = v;
        result.best_epoch = epoch;
        result.params = net.export_params();
        since_best = 0;
      } else if (++since_best >= config.patience) {
        break;
      }
    } else {
      result.best_epoch = epoch;
      result.params = net.export_params();
    }
  }
  if (!result.params.all_finite()) fail(ErrorCategory::Numeric, "training diverged to non-finite parameters");
  return result;
}

}  // namespace gazenet::nn
