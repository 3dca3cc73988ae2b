#include "gazenet/pipeline/config.hpp"

#include "gazenet/error.hpp"
#include "gazenet/text_io.hpp"

namespace gazenet::pipeline {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d{
      {"seed", "1"},
      {"threads", "0"},
      {"screen.width_px", "1920"},
      {"screen.height_px", "1080"},
      {"screen.width_cm", "52"},
      {"screen.height_cm", "29"},
      {"screen.distance_cm", "60"},
      {"idt.dispersion_deg", "1.0"},
      {"idt.min_duration_ms", "100"},
      {"idt.max_gap_ms", "75"},
      {"saliency.sigma_deg", "1.5"},
      {"saliency.truncate_sigmas", "4"},
      {"features.length", "256"},
      {"model.spec_file", ""},
      {"model.conv", "9:1:16,7:1:32,5:1:32,3:1:64"},
      {"model.pool", "average"},
      {"model.dense_layers", "2"},
      {"model.hidden", "32"},
      {"model.dropout", "0.4"},
      {"train.learning_rate", "0.001"},
      {"train.batch_size", "32"},
      {"train.epochs", "100"},
      {"train.patience", "10"},
      {"train.validation_fraction", "0.1"},
      {"pretrain.epochs", "100"},
      {"transfer.head", "reuse"},
      {"cv.resamplings", "10"},
      {"cv.folds", "10"},
      {"cv.permutations", "1000"},
      {"roi.rows", "4"},
      {"roi.cols", "4"},
      {"svm.lambda", "0.01"},
      {"svm.eta0", "0.1"},
      {"svm.epochs", "60"},
      {"rfe.step", "0.2"},
      {"hyper.trials", "10"},
      {"hyper.epochs", "30"},
      {"synth.n_adhd", "20"},
      {"synth.n_control", "20"},
      {"synth.n_pretrain", "0"},
      {"synth.effect_duration", "1.5"},
      {"synth.effect_saliency", "1.5"},
      {"synth.frames", "200"},
      {"synth.fps", "10"},
      {"synth.sampling_rate_hz", "60"},
      {"synth.raster_width", "48"},
      {"synth.raster_height", "27"},
      {"synth.video_id", "synth"},
  };
  return d;
}

}  // namespace

Config::Config() : values_(defaults()) {}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCategory::Config, "unknown configuration key '" + key + "'");
  it->second = std::string(text_io::trim(value));
}

void Config::load_file(const std::filesystem::path& path) {
  const auto lines = text_io::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text_io::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCategory::Config, path.string() + ":" + std::to_string(i + 1) + ": expected key=value");
    }
    set(std::string(text_io::trim(line.substr(0, eq))), std::string(line.substr(eq + 1)));
  }
}

void Config::apply_overrides(std::span<const std::string> assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) fail(ErrorCategory::Config, "override '" + a + "' is not key=value");
    set(std::string(text_io::trim(std::string_view(a).substr(0, eq))), a.substr(eq + 1));
  }
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCategory::Config, "unknown configuration key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key) const {
  try {
    return text_io::parse_double(get(key), key);
  } catch (const Error& e) {
    fail(ErrorCategory::Config, e.what());
  }
}

long long Config::get_int(const std::string& key) const {
  try {
    return text_io::parse_int(get(key), key);
  } catch (const Error& e) {
    fail(ErrorCategory::Config, e.what());
  }
}

std::uint64_t Config::get_seed() const {
  const long long s = get_int("seed");
  if (s < 0) fail(ErrorCategory::Config, "seed must be non-negative");
  return static_cast<std::uint64_t>(s);
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::string Config::hash() const { return text_io::hex64(text_io::fnv1a(canonical())); }

}  // namespace gazenet::pipeline
