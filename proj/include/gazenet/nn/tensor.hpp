#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gazenet::nn {

// Dense activations for a mini-batch: n samples x c channels x t steps,
// row-major. Dense layers see each sample as a flat c*t vector.
struct Batch {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t t = 0;
  std::vector<double> v;

  Batch() = default;
  Batch(std::size_t n_, std::size_t c_, std::size_t t_) : n(n_), c(c_), t(t_), v(n_ * c_ * t_, 0.0) {}

  std::size_t sample_size() const { return c * t; }
  double* sample(std::size_t i) { return v.data() + i * c * t; }
  const double* sample(std::size_t i) const { return v.data() + i * c * t; }
  double* row(std::size_t i, std::size_t ch) { return v.data() + (i * c + ch) * t; }
  const double* row(std::size_t i, std::size_t ch) const { return v.data() + (i * c + ch) * t; }
};

// A named parameter tensor. Running statistics of batch normalization are
// stored as tensors too, so one list captures the full model state.
struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;

  std::size_t numel() const;
};

struct ModelParams {
  std::vector<Tensor> tensors;

  const Tensor* find(const std::string& name) const;
  Tensor* find(const std::string& name);
  bool all_finite() const;
};

bool operator==(const Tensor& a, const Tensor& b);
bool operator==(const ModelParams& a, const ModelParams& b);

std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace gazenet::nn
