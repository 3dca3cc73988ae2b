#pragma once

#include <string>
#include <vector>

#include "gazenet/nn/layers.hpp"
#include "gazenet/nn/model_spec.hpp"

namespace gazenet::nn {

// Random-search space over the CNN architecture.
struct HyperSearchSpace {
  std::vector<int> conv_layers{3, 4, 5, 6, 7, 8, 9};
  std::vector<int> kernels{3, 5, 7, 9, 11};
  std::vector<int> filters{8, 16, 32, 64};
  std::vector<int> strides{1, 2, 3};
  std::vector<int> dense_layers{1, 2, 3};
  std::vector<int> hidden_units{8, 16, 32, 64};
  std::vector<double> dropout{0.2, 0.3, 0.4, 0.5, 0.6};
  std::vector<PoolKind> pooling{PoolKind::Max, PoolKind::Average};
};

// Largest stride permitted for a kernel size: 1 for k <= 5, 2 for k = 7,
// otherwise unrestricted.
int max_stride_for_kernel(int kernel);

// Human-readable list of violated architecture constraints: kernel sizes
// non-increasing, filter counts non-decreasing, and the stride rule above.
std::vector<std::string> constraint_violations(const ModelSpec& spec);

// Draws a spec layer by layer so that every constraint holds and the
// conv/pool stack fits `input_length`. Depths that cannot fit are excluded
// up front, so sampling never rejects.
ModelSpec sample_hyperconfig(const HyperSearchSpace& space, int input_length, int input_channels, HeadKind head,
                             Rng& rng);

}  // namespace gazenet::nn
