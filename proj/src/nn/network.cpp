#include "gazenet/nn/network.hpp"

#include <algorithm>
#include <cmath>

#include "gazenet/error.hpp"
#include "gazenet/nn/loss.hpp"

namespace gazenet::nn {

namespace {

void he_uniform(std::vector<double>& w, std::size_t fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (double& v : w) v = u(rng);
}

bool is_head_tensor(const std::string& name) { return name.rfind("head.", 0) == 0; }

}  // namespace

Network::Network(const ModelSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  build();
  Rng rng(seed);
  for (auto& layer : layers_) {
    if (auto* conv = dynamic_cast<Conv1d*>(layer.get())) {
      he_uniform(conv->weight(), conv->in_channels() * conv->kernel(), rng);
    } else if (auto* dense = dynamic_cast<Dense*>(layer.get())) {
      he_uniform(dense->weight(), dense->inputs(), rng);
    }
  }
}

Network::Network(const ModelSpec& spec, const ModelParams& params) : spec_(spec) {
  spec_.validate();
  build();
  import_params(params);
}

Network::Network(const Network& other) : spec_(other.spec_), names_(other.names_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Network::build() {
  layers_.clear();
  names_.clear();
  auto add = [&](std::unique_ptr<Layer> l, std::string name) {
    layers_.push_back(std::move(l));
    names_.push_back(std::move(name));
  };
  std::size_t channels = static_cast<std::size_t>(spec_.input_channels);
  for (std::size_t i = 0; i < spec_.conv_layers.size(); ++i) {
    const auto& c = spec_.conv_layers[i];
    const auto idx = std::to_string(i);
    const auto filters = static_cast<std::size_t>(c.filters);
    add(std::make_unique<Conv1d>(channels, filters, static_cast<std::size_t>(c.kernel),
                                 static_cast<std::size_t>(c.stride)),
        "conv" + idx);
    add(std::make_unique<ReLU>(), "relu" + idx);
    add(std::make_unique<BatchNorm1d>(filters), "bn" + idx);
    add(std::make_unique<Pool1d>(spec_.pool), "pool" + idx);
    channels = filters;
  }
  add(std::make_unique<Dropout>(spec_.dropout), "dropout");
  std::size_t width = spec_.flattened_size();
  for (int d = 0; d + 1 < spec_.dense_layers; ++d) {
    const auto idx = std::to_string(d);
    add(std::make_unique<Dense>(width, static_cast<std::size_t>(spec_.hidden_units)), "dense" + idx);
    add(std::make_unique<ReLU>(), "dense_relu" + idx);
    width = static_cast<std::size_t>(spec_.hidden_units);
  }
  add(std::make_unique<Dense>(width, 1), "head");
}

Batch Network::forward(const Batch& x, Mode mode, Rng* rng) {
  if (x.c != static_cast<std::size_t>(spec_.input_channels) || x.t != static_cast<std::size_t>(spec_.input_length)) {
    fail(ErrorCategory::Shape, "network input must be " + std::to_string(spec_.input_channels) + "x" +
                                   std::to_string(spec_.input_length));
  }
  Batch h = layers_.front()->forward(x, mode, rng);
  for (std::size_t i = 1; i < layers_.size(); ++i) h = layers_[i]->forward(h, mode, rng);
  return h;
}

Batch Network::backward(const Batch& grad_output) {
  Batch g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
  return g;
}

void Network::zero_grad() {
  for (auto& layer : layers_) {
    for (auto& slot : layer->params()) std::fill(slot.grad->begin(), slot.grad->end(), 0.0);
  }
}

std::vector<Batch> Network::forward_trace(const Batch& x) {
  std::vector<Batch> trace;
  trace.reserve(layers_.size());
  Batch h = x;
  for (auto& layer : layers_) {
    h = layer->forward(h, Mode::Infer, nullptr);
    trace.push_back(h);
  }
  return trace;
}

std::vector<double> Network::predict(const Batch& x) {
  const Batch out = forward(x, Mode::Infer, nullptr);
  std::vector<double> preds(out.v.begin(), out.v.end());
  if (spec_.head == HeadKind::Sigmoid) {
    for (double& p : preds) p = sigmoid(p);
  }
  return preds;
}

std::vector<ParamSlot> Network::slots() {
  std::vector<ParamSlot> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto slot : layers_[i]->params()) {
      slot.name = names_[i] + "." + slot.name;
      out.push_back(std::move(slot));
    }
  }
  return out;
}

ModelParams Network::export_params() const {
  ModelParams p;
  for (auto& slot : const_cast<Network*>(this)->slots()) p.tensors.push_back({slot.name, slot.shape, *slot.value});
  return p;
}

void Network::import_params(const ModelParams& params) {
  auto targets = slots();
  std::vector<std::string> problems;
  for (const auto& slot : targets) {
    const Tensor* t = params.find(slot.name);
    if (t == nullptr) {
      problems.push_back(slot.name + " (missing)");
    } else if (t->shape != slot.shape || t->values.size() != slot.value->size()) {
      problems.push_back(slot.name + " (expected " + shape_string(slot.shape) + ", got " + shape_string(t->shape) + ")");
    }
  }
  for (const auto& t : params.tensors) {
    const bool known = std::any_of(targets.begin(), targets.end(), [&](const ParamSlot& s) { return s.name == t.name; });
    if (!known) problems.push_back(t.name + " (unexpected)");
  }
  if (!problems.empty()) {
    std::string msg = "parameter shape mismatch:";
    for (const auto& p : problems) msg += " " + p + ";";
    fail(ErrorCategory::Shape, msg);
  }
  for (auto& slot : targets) *slot.value = params.find(slot.name)->values;
}

Batch make_batch(std::span<const std::vector<double>* const> inputs, std::size_t channels, std::size_t length) {
  Batch b(inputs.size(), channels, length);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i]->size() != channels * length) fail(ErrorCategory::Shape, "input tensor has wrong size");
    std::copy(inputs[i]->begin(), inputs[i]->end(), b.sample(i));
  }
  return b;
}

Batch make_batch(const std::vector<std::vector<double>>& inputs, std::size_t channels, std::size_t length) {
  std::vector<const std::vector<double>*> ptrs;
  ptrs.reserve(inputs.size());
  for (const auto& in : inputs) ptrs.push_back(&in);
  return make_batch(std::span<const std::vector<double>* const>(ptrs), channels, length);
}

TransferResult transfer_head(const ModelSpec& source_spec, const ModelParams& source, const ModelSpec& target_spec,
                             HeadInit mode, std::uint64_t seed) {
  ModelSpec src_cmp = source_spec;
  src_cmp.head = target_spec.head;
  if (!(src_cmp == target_spec)) {
    fail(ErrorCategory::Shape, "transfer: target spec differs from source beyond the head activation (source: " +
                                   source_spec.to_string() + "; target: " + target_spec.to_string() + ")");
  }
  // Validates every tensor shape against the architecture.
  Network target(target_spec, source);

  TransferResult result;
  result.spec = target_spec;
  if (mode == HeadInit::Reinitialize) {
    Network fresh(target_spec, seed);
    const ModelParams fresh_params = fresh.export_params();
    ModelParams p = source;
    for (auto& t : p.tensors) {
      if (is_head_tensor(t.name)) {
        t.values = fresh_params.find(t.name)->values;
        result.report.reinitialized.push_back(t.name);
      }
    }
    result.params = std::move(p);
  } else {
    result.params = source;
  }
  for (const auto& t : result.params.tensors) {
    if (mode == HeadInit::Reinitialize && is_head_tensor(t.name)) continue;
    result.report.copied.push_back(t.name);
    if (!(t == *source.find(t.name))) result.report.all_copied_equal = false;
  }
  return result;
}

}  // namespace gazenet::nn
