#include "gazenet/nn/checkpoint.hpp"

#include "gazenet/error.hpp"
#include "gazenet/text_io.hpp"

namespace gazenet::nn {

namespace {

std::string_view next_line(std::string_view bytes, std::size_t& pos, const std::string& origin) {
  const auto eol = bytes.find('\n', pos);
  if (eol == std::string_view::npos) fail(ErrorCategory::Format, origin + ": truncated header");
  const auto line = bytes.substr(pos, eol - pos);
  pos = eol + 1;
  return line;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out = "CKPT1\n";
  out += "spec " + ckpt.spec.to_string() + '\n';
  out += "tensors " + std::to_string(ckpt.params.tensors.size()) + '\n';
  for (const auto& t : ckpt.params.tensors) {
    if (t.values.size() != t.numel()) fail(ErrorCategory::Shape, "tensor " + t.name + " has inconsistent size");
    out += t.name + ' ' + std::to_string(t.shape.size());
    for (auto d : t.shape) out += ' ' + std::to_string(d);
    out += '\n';
    for (double v : t.values) text_io::append_f32_le(out, v);
  }
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes, const std::string& origin) {
  std::size_t pos = 0;
  if (next_line(bytes, pos, origin) != "CKPT1") fail(ErrorCategory::Format, origin + ": bad CKPT1 magic");
  Checkpoint ckpt;
  const auto spec_line = next_line(bytes, pos, origin);
  if (spec_line.rfind("spec ", 0) != 0) fail(ErrorCategory::Format, origin + ": missing spec line");
  ckpt.spec = ModelSpec::parse(std::string(spec_line.substr(5)));
  const auto count_line = next_line(bytes, pos, origin);
  if (count_line.rfind("tensors ", 0) != 0) fail(ErrorCategory::Format, origin + ": missing tensor count");
  const auto count = text_io::parse_int(count_line.substr(8), origin);
  for (long long i = 0; i < count; ++i) {
    const auto fields = text_io::split(next_line(bytes, pos, origin), ' ');
    if (fields.size() < 2) fail(ErrorCategory::Format, origin + ": malformed tensor header");
    Tensor t;
    t.name = fields[0];
    const auto rank = static_cast<std::size_t>(text_io::parse_int(fields[1], origin));
    if (fields.size() != rank + 2) fail(ErrorCategory::Format, origin + ": tensor " + t.name + " rank mismatch");
    for (std::size_t d = 0; d < rank; ++d) {
      t.shape.push_back(static_cast<std::size_t>(text_io::parse_int(fields[2 + d], origin)));
    }
    const auto n = t.numel();
    t.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) t.values[k] = text_io::read_f32_le(bytes, pos + 4 * k);
    pos += 4 * n;
    ckpt.params.tensors.push_back(std::move(t));
  }
  if (pos != bytes.size()) fail(ErrorCategory::Format, origin + ": trailing bytes after last tensor");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  text_io::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(text_io::read_file(path), path.string());
}

ModelParams round_to_f32(ModelParams params) {
  for (auto& t : params.tensors) {
    for (double& v : t.values) v = static_cast<double>(static_cast<float>(v));
  }
  return params;
}

}  // namespace gazenet::nn
