#include "gazenet/nn/hyper.hpp"

#include <algorithm>

#include "gazenet/error.hpp"

namespace gazenet::nn {

namespace {

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

// Smallest sequence length that still admits `remaining` more conv blocks
// using the cheapest admissible layer (smallest kernel, stride 1).
std::size_t min_length_for(std::size_t remaining, int min_kernel) {
  std::size_t need = 1;
  for (std::size_t i = 0; i < remaining; ++i) need = 2 * need + static_cast<std::size_t>(min_kernel) - 1;
  return need;
}

}  // namespace

int max_stride_for_kernel(int kernel) {
  if (kernel <= 5) return 1;
  if (kernel == 7) return 2;
  return 3;
}

std::vector<std::string> constraint_violations(const ModelSpec& spec) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < spec.conv_layers.size(); ++i) {
    const auto& l = spec.conv_layers[i];
    const auto where = "layer " + std::to_string(i);
    if (l.stride > max_stride_for_kernel(l.kernel)) {
      out.push_back(where + ": stride " + std::to_string(l.stride) + " not allowed for kernel " +
                    std::to_string(l.kernel));
    }
    if (i > 0) {
      const auto& prev = spec.conv_layers[i - 1];
      if (l.kernel > prev.kernel) out.push_back(where + ": kernel larger than previous layer");
      if (l.filters < prev.filters) out.push_back(where + ": fewer filters than previous layer");
    }
  }
  return out;
}

ModelSpec sample_hyperconfig(const HyperSearchSpace& space, int input_length, int input_channels, HeadKind head,
                             Rng& rng) {
  if (space.conv_layers.empty() || space.kernels.empty() || space.filters.empty() || space.strides.empty() ||
      space.dense_layers.empty() || space.hidden_units.empty() || space.dropout.empty() || space.pooling.empty()) {
    fail(ErrorCategory::Config, "hyperparameter search space has an empty dimension");
  }
  const int min_kernel = *std::min_element(space.kernels.begin(), space.kernels.end());
  const auto length = static_cast<std::size_t>(input_length);

  std::vector<int> depths;
  for (int d : space.conv_layers) {
    if (d >= 1 && length >= min_length_for(static_cast<std::size_t>(d), min_kernel)) depths.push_back(d);
  }
  if (depths.empty()) {
    fail(ErrorCategory::Config, "input length " + std::to_string(input_length) + " admits no conv depth in the space");
  }

  ModelSpec spec;
  spec.input_channels = input_channels;
  spec.input_length = input_length;
  spec.head = head;
  spec.conv_layers.clear();
  const int depth = pick(depths, rng);

  std::size_t len = length;
  int prev_kernel = *std::max_element(space.kernels.begin(), space.kernels.end());
  int prev_filters = *std::min_element(space.filters.begin(), space.filters.end());
  for (int i = 0; i < depth; ++i) {
    const auto remaining = static_cast<std::size_t>(depth - i - 1);
    const std::size_t need_after = min_length_for(remaining, min_kernel);
    std::vector<std::pair<int, int>> choices;  // (kernel, stride)
    for (int k : space.kernels) {
      if (k > prev_kernel) continue;
      for (int s : space.strides) {
        if (s > max_stride_for_kernel(k)) continue;
        const auto pooled = conv_output_length(len, k, s) / 2;
        if (pooled >= need_after && pooled >= 1) choices.emplace_back(k, s);
      }
    }
    // (min_kernel, 1) always fits by construction of `depths`.
    const auto [kernel, stride] = pick(choices, rng);
    std::vector<int> filter_choices;
    for (int f : space.filters) {
      if (f >= prev_filters) filter_choices.push_back(f);
    }
    const int filters = pick(filter_choices, rng);
    spec.conv_layers.push_back({kernel, stride, filters});
    len = conv_output_length(len, kernel, stride) / 2;
    prev_kernel = kernel;
    prev_filters = filters;
  }
  spec.dense_layers = pick(space.dense_layers, rng);
  spec.hidden_units = pick(space.hidden_units, rng);
  spec.dropout = pick(space.dropout, rng);
  spec.pool = pick(space.pooling, rng);
  return spec;
}

}  // namespace gazenet::nn
