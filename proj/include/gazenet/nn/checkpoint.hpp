#pragma once

#include <filesystem>

#include "gazenet/nn/model_spec.hpp"
#include "gazenet/nn/tensor.hpp"

namespace gazenet::nn {

struct Checkpoint {
  ModelSpec spec;
  ModelParams params;
};

// CKPT1 layout:
//   CKPT1\n
//   spec <ModelSpec::to_string()>\n
//   tensors <count>\n
//   then per tensor: `<name> <rank> <dim0> ... <dimN>\n` + little-endian f32 values.
// Tensors are written in network order (layer order; weights, biases, norm
// parameters). Values are stored as 32-bit floats.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view bytes, const std::string& origin = "checkpoint");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Rounds every value through float32, matching what a checkpoint stores.
ModelParams round_to_f32(ModelParams params);

}  // namespace gazenet::nn
