#include "gazenet/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace gazenet::nn {

std::size_t Tensor::numel() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

const Tensor* ModelParams::find(const std::string& name) const {
  const auto it = std::find_if(tensors.begin(), tensors.end(), [&](const Tensor& t) { return t.name == name; });
  return it == tensors.end() ? nullptr : &*it;
}

Tensor* ModelParams::find(const std::string& name) {
  const auto it = std::find_if(tensors.begin(), tensors.end(), [&](const Tensor& t) { return t.name == name; });
  return it == tensors.end() ? nullptr : &*it;
}

bool ModelParams::all_finite() const {
  return std::all_of(tensors.begin(), tensors.end(), [](const Tensor& t) {
    return std::all_of(t.values.begin(), t.values.end(), [](double v) { return std::isfinite(v); });
  });
}

bool operator==(const Tensor& a, const Tensor& b) {
  return a.name == b.name && a.shape == b.shape && a.values == b.values;
}

bool operator==(const ModelParams& a, const ModelParams& b) { return a.tensors == b.tensors; }

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace gazenet::nn
