#pragma once

// Central finite-difference gradient checks for layers and whole networks.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "gazenet/nn/layers.hpp"
#include "gazenet/nn/loss.hpp"
#include "gazenet/nn/network.hpp"
#include "gazenet/nn/train.hpp"
#include "oracles.hpp"

namespace gradcheck {

using gazenet::nn::Batch;
using gazenet::nn::Layer;
using gazenet::nn::Mode;
using gazenet::nn::Rng;

inline constexpr double kStep = 1e-5;
// Entries probed per tensor; larger tensors are sub-sampled.
inline constexpr std::size_t kProbesPerTensor = 24;

inline Batch random_batch(std::size_t n, std::size_t c, std::size_t t, Rng& rng) {
  Batch b(n, c, t);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double& v : b.v) v = g(rng);
  return b;
}

inline std::vector<std::size_t> probe_indices(std::size_t size, Rng& rng) {
  std::vector<std::size_t> idx(size);
  for (std::size_t i = 0; i < size; ++i) idx[i] = i;
  if (size > kProbesPerTensor) {
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(kProbesPerTensor);
  }
  return idx;
}

// Draws every trainable tensor from N(mean, sd); batch norm scales around 1.
inline void randomize(Layer& layer, Rng& rng) {
  std::normal_distribution<double> g(0.0, 0.5);
  for (auto& slot : layer.params()) {
    if (!slot.trainable) continue;
    const double base = slot.name == "gamma" ? 1.0 : 0.0;
    for (double& v : *slot.value) v = base + g(rng);
  }
}

// Loss sum(c * layer(x)); compares input and parameter gradients.
inline double check_layer(Layer& layer, Batch x, Mode mode, std::uint64_t seed) {
  Rng probe_rng(seed ^ 0x5eed);
  Rng drop_rng(seed);
  Batch y = layer.forward(x, mode, &drop_rng);
  Batch coef = random_batch(y.n, y.c, y.t, probe_rng);
  auto loss = [&]() {
    Rng r(seed);
    Batch out = layer.forward(x, mode, &r);
    double s = 0;
    for (std::size_t i = 0; i < out.v.size(); ++i) s += coef.v[i] * out.v[i];
    return s;
  };
  for (auto& slot : layer.params()) std::fill(slot.grad->begin(), slot.grad->end(), 0.0);
  {
    Rng r(seed);
    layer.forward(x, mode, &r);
  }
  Batch gx = layer.backward(coef);

  std::vector<double> analytic, numeric;
  for (std::size_t i : probe_indices(x.v.size(), probe_rng)) {
    const double keep = x.v[i];
    x.v[i] = keep + kStep;
    const double up = loss();
    x.v[i] = keep - kStep;
    const double down = loss();
    x.v[i] = keep;
    analytic.push_back(gx.v[i]);
    numeric.push_back((up - down) / (2 * kStep));
  }
  for (auto& slot : layer.params()) {
    if (!slot.trainable) continue;
    for (std::size_t i : probe_indices(slot.value->size(), probe_rng)) {
      const double keep = (*slot.value)[i];
      (*slot.value)[i] = keep + kStep;
      const double up = loss();
      (*slot.value)[i] = keep - kStep;
      const double down = loss();
      (*slot.value)[i] = keep;
      analytic.push_back((*slot.grad)[i]);
      numeric.push_back((up - down) / (2 * kStep));
    }
  }
  return oracle::relative_error(analytic, numeric);
}

// Mean loss of the full network in training mode with a fixed dropout mask.
inline double check_network(const gazenet::nn::ModelSpec& spec, gazenet::nn::Objective objective, std::size_t n,
                            std::uint64_t seed) {
  using namespace gazenet::nn;
  Network net(spec, seed);
  Rng rng(seed * 7 + 3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto& slot : net.slots()) {
    if (slot.name.find(".gamma") != std::string::npos) {
      for (double& v : *slot.value) v = 1.0 + 0.3 * g(rng);
    } else if (slot.name.find(".beta") != std::string::npos || slot.name.find(".bias") != std::string::npos) {
      for (double& v : *slot.value) v = 0.2 * g(rng);
    }
  }
  Batch x = random_batch(n, std::size_t(spec.input_channels), std::size_t(spec.input_length), rng);
  std::vector<double> targets(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    targets[i] = objective == Objective::BinaryCrossEntropy ? double(i % 2) : g(rng);
  }
  const std::uint64_t drop_seed = seed + 11;
  auto eval = [&](Batch& in, bool with_backward, Batch* grad_in) {
    Rng r(drop_seed);
    Batch out = net.forward(in, Mode::Train, &r);
    const LossResult lr = objective == Objective::BinaryCrossEntropy ? bce_from_logits(out.v, targets)
                                                                     : mse_from_outputs(out.v, targets);
    if (with_backward) {
      Batch go(out.n, out.c, out.t);
      go.v = lr.grad_logits;
      *grad_in = net.backward(go);
    }
    return lr.loss;
  };
  net.zero_grad();
  Batch gx;
  eval(x, true, &gx);

  std::vector<double> analytic, numeric;
  for (std::size_t i : probe_indices(x.v.size(), rng)) {
    const double keep = x.v[i];
    x.v[i] = keep + kStep;
    const double up = eval(x, false, nullptr);
    x.v[i] = keep - kStep;
    const double down = eval(x, false, nullptr);
    x.v[i] = keep;
    analytic.push_back(gx.v[i]);
    numeric.push_back((up - down) / (2 * kStep));
  }
  for (auto& slot : net.slots()) {
    if (!slot.trainable) continue;
    for (std::size_t i : probe_indices(slot.value->size(), rng)) {
      const double keep = (*slot.value)[i];
      (*slot.value)[i] = keep + kStep;
      const double up = eval(x, false, nullptr);
      (*slot.value)[i] = keep - kStep;
      const double down = eval(x, false, nullptr);
      (*slot.value)[i] = keep;
      analytic.push_back((*slot.grad)[i]);
      numeric.push_back((up - down) / (2 * kStep));
    }
  }
  return oracle::relative_error(analytic, numeric);
}

// Small random architecture for gradient checks.
inline gazenet::nn::ModelSpec random_small_spec(std::uint64_t seed, gazenet::nn::HeadKind head) {
  using namespace gazenet::nn;
  Rng rng(seed);
  auto pick = [&](std::vector<int> v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
  ModelSpec s;
  s.conv_layers.clear();
  const int depth = pick({1, 2});
  int kernel = pick({3, 5, 7});
  int filters = 8;
  for (int i = 0; i < depth; ++i) {
    const int stride = kernel == 7 ? pick({1, 2}) : 1;
    s.conv_layers.push_back({kernel, stride, filters});
    kernel = std::min(kernel, pick({3, 5}));
  }
  s.pool = seed % 2 ? PoolKind::Max : PoolKind::Average;
  s.dense_layers = pick({1, 2});
  s.hidden_units = 8;
  s.dropout = pick({0, 0, 1}) ? 0.3 : 0.0;
  s.head = head;
  s.input_channels = 4;
  s.input_length = pick({32, 40, 48});
  s.validate();
  return s;
}

// Parameters with non-trivial batch norm statistics and biases, as after
// training.
inline gazenet::nn::ModelParams randomized_params(const gazenet::nn::ModelSpec& spec, std::uint64_t seed) {
  using namespace gazenet::nn;
  auto params = Network(spec, seed).export_params();
  Rng rng(seed ^ 0xabcdef);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.3, 2.0);
  for (auto& t : params.tensors) {
    const auto& n = t.name;
    for (double& v : t.values) {
      if (n.find("running_var") != std::string::npos) v = u(rng);
      else if (n.find("gamma") != std::string::npos) v = u(rng);
      else if (n.find("running_mean") != std::string::npos || n.find("beta") != std::string::npos ||
               n.find("bias") != std::string::npos) v = 0.3 * g(rng);
    }
  }
  return params;
}

}  // namespace gradcheck
