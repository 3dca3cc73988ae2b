#include "gazenet/features.hpp"

#include <algorithm>
#include <cmath>

#include "gazenet/error.hpp"
#include "gazenet/text_io.hpp"

namespace gazenet {

std::string_view channel_name(std::size_t c) {
  static constexpr std::string_view names[kNumChannels] = {"saliency", "x", "y", "duration"};
  return c < kNumChannels ? names[c] : "unknown";
}

void FeatureSequence::validate() const {
  const std::size_t m = channels[0].size();
  for (const auto& ch : channels) {
    if (ch.size() != m) fail(ErrorCategory::Shape, "feature channels differ in length");
  }
}

std::vector<double> extract_scanpath_saliency(const Scanpath& sp, SaliencyStore& store, const ScreenGeometry& g,
                                              const ExtractionMaskSpec& spec) {
  std::vector<double> out;
  out.reserve(sp.size());
  for (const auto& fix : sp.fixations) {
    const SaliencyMap& map = store.normalized_frame(fix.center_frame);
    const auto mask = build_extraction_mask(fix, map.height, map.width, g, spec);
    // Clamp away ulp-level excursions from the normalized mask sum.
    out.push_back(std::clamp(extract_saliency(map, mask), 0.0, 1.0));
  }
  return out;
}

FeatureSequence assemble(const Scanpath& sp, std::span<const double> saliency) {
  if (sp.empty()) {
    fail(ErrorCategory::Data, "scanpath " + sp.subject_id + "/" + sp.video_id + " has no fixations");
  }
  if (saliency.size() != sp.size()) fail(ErrorCategory::Shape, "one saliency value per fixation is required");
  FeatureSequence f;
  f.subject_id = sp.subject_id;
  f.video_id = sp.video_id;
  for (auto& ch : f.channels) ch.reserve(sp.size());
  for (std::size_t i = 0; i < sp.size(); ++i) {
    const auto& fix = sp.fixations[i];
    f.channels[0].push_back(saliency[i]);
    f.channels[1].push_back(fix.x_deg);
    f.channels[2].push_back(fix.y_deg);
    f.channels[3].push_back(fix.duration_ms);
  }
  return f;
}

FeatureSequence assemble(const Scanpath& sp, SaliencyStore& store, const ScreenGeometry& g,
                         const ExtractionMaskSpec& spec) {
  if (sp.empty()) {
    fail(ErrorCategory::Data, "scanpath " + sp.subject_id + "/" + sp.video_id + " has no fixations");
  }
  const auto saliency = extract_scanpath_saliency(sp, store, g, spec);
  return assemble(sp, saliency);
}

ChannelStats fit_stats(std::span<const FeatureSequence> train, std::string fitted_on) {
  if (train.empty()) fail(ErrorCategory::InvalidArgument, "fit_stats needs at least one training sequence");
  ChannelStats stats;
  stats.fitted_on = std::move(fitted_on);
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& f : train) {
      for (double v : f.channels[c]) sum += v;
      count += f.channels[c].size();
    }
    if (count == 0) fail(ErrorCategory::Data, "fit_stats: training sequences are empty");
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const auto& f : train) {
      for (double v : f.channels[c]) ss += (v - mean) * (v - mean);
    }
    stats.mean[c] = mean;
    stats.stddev[c] = std::max(std::sqrt(ss / static_cast<double>(count)), kStdFloor);
  }
  return stats;
}

std::string split_identifier(std::vector<std::string> subject_ids) {
  std::sort(subject_ids.begin(), subject_ids.end());
  std::uint64_t h = text_io::fnv1a("split");
  for (const auto& s : subject_ids) {
    h = text_io::fnv1a(s, h);
    h = text_io::fnv1a(std::string_view("\x1f", 1), h);
  }
  return text_io::hex64(h);
}

ModelInput normalize_and_fit_length(const FeatureSequence& f, const ChannelStats& stats, std::size_t length) {
  if (length < 1) fail(ErrorCategory::InvalidArgument, "model length must be at least 1");
  f.validate();
  ModelInput in;
  in.length = length;
  in.true_length = std::min(f.length(), length);
  in.values.assign(kNumChannels * length, 0.0);
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    for (std::size_t t = 0; t < in.true_length; ++t) {
      in.values[c * length + t] = (f.channels[c][t] - stats.mean[c]) / stats.stddev[c];
    }
  }
  return in;
}

void mask_channel(ModelInput& input, std::size_t channel) {
  if (channel >= kNumChannels) fail(ErrorCategory::InvalidArgument, "channel index out of range");
  std::fill_n(input.values.begin() + static_cast<std::ptrdiff_t>(channel * input.length), input.length, 0.0);
}

void write_feature_tensor(const std::filesystem::path& path, const FeatureTensorFile& t) {
  if (t.values.size() != kNumChannels * t.length) fail(ErrorCategory::Shape, "feature tensor size mismatch");
  std::string out = "FEAT1\n";
  out += t.subject_id + ' ' + t.video_id + " 4 " + std::to_string(t.length) +
         " true_length=" + std::to_string(t.true_length);
  if (t.has_delta) out += " delta=" + text_io::format_double(t.delta);
  out += '\n';
  for (double v : t.values) text_io::append_f32_le(out, v);
  text_io::write_file(path, out);
}

FeatureTensorFile read_feature_tensor(const std::filesystem::path& path) {
  const std::string bytes = text_io::read_file(path);
  constexpr std::string_view magic = "FEAT1\n";
  if (bytes.compare(0, magic.size(), magic) != 0) fail(ErrorCategory::Format, path.string() + ": bad FEAT1 magic");
  const auto eol = bytes.find('\n', magic.size());
  if (eol == std::string::npos) fail(ErrorCategory::Format, path.string() + ": missing tensor header");
  const auto header = text_io::split(std::string_view(bytes).substr(magic.size(), eol - magic.size()), ' ');
  if (header.size() < 5) fail(ErrorCategory::Format, path.string() + ": short tensor header");
  FeatureTensorFile t;
  t.subject_id = header[0];
  t.video_id = header[1];
  if (text_io::parse_int(header[2], path.string()) != 4) {
    fail(ErrorCategory::Format, path.string() + ": expected 4 channels");
  }
  t.length = static_cast<std::size_t>(text_io::parse_int(header[3], path.string()));
  for (std::size_t i = 4; i < header.size(); ++i) {
    const auto& field = header[i];
    if (field.rfind("true_length=", 0) == 0) {
      t.true_length = static_cast<std::size_t>(text_io::parse_int(field.substr(12), path.string()));
    } else if (field.rfind("delta=", 0) == 0) {
      t.has_delta = true;
      t.delta = text_io::parse_double(field.substr(6), path.string());
    } else {
      fail(ErrorCategory::Format, path.string() + ": unknown header field '" + field + "'");
    }
  }
  const std::size_t payload = eol + 1;
  const std::size_t count = kNumChannels * t.length;
  if (bytes.size() != payload + 4 * count) fail(ErrorCategory::Format, path.string() + ": payload size mismatch");
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) t.values[i] = text_io::read_f32_le(bytes, payload + 4 * i);
  return t;
}

FeatureTensorFile to_tensor_file(const FeatureSequence& f) {
  f.validate();
  FeatureTensorFile t;
  t.subject_id = f.subject_id;
  t.video_id = f.video_id;
  t.length = f.length();
  t.true_length = f.length();
  t.values.reserve(kNumChannels * t.length);
  for (const auto& ch : f.channels) t.values.insert(t.values.end(), ch.begin(), ch.end());
  return t;
}

FeatureSequence from_tensor_file(const FeatureTensorFile& t) {
  FeatureSequence f;
  f.subject_id = t.subject_id;
  f.video_id = t.video_id;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const auto begin = t.values.begin() + static_cast<std::ptrdiff_t>(c * t.length);
    f.channels[c].assign(begin, begin + static_cast<std::ptrdiff_t>(t.true_length));
  }
  return f;
}

}  // namespace gazenet
