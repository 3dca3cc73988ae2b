#include "gazenet/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gazenet/error.hpp"
#include "gazenet/text_io.hpp"

namespace gazenet {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double cm_per_px(Axis axis, const ScreenGeometry& g) {
  return axis == Axis::Horizontal ? g.width_cm / g.width_px : g.height_cm / g.height_px;
}

double center_px(Axis axis, const ScreenGeometry& g) {
  return axis == Axis::Horizontal ? g.width_px / 2.0 : g.height_px / 2.0;
}

}  // namespace

void ScreenGeometry::validate() const {
  if (width_px <= 0 || height_px <= 0 || !(width_cm > 0) || !(height_cm > 0) ||
      !(viewing_distance_cm > 0)) {
    fail(ErrorCategory::InvalidArgument, "screen geometry fields must be strictly positive");
  }
}

double px_to_deg(double px, Axis axis, const ScreenGeometry& g) {
  if (!std::isfinite(px)) fail(ErrorCategory::InvalidArgument, "px_to_deg: non-finite coordinate");
  const double offset_cm = (px - center_px(axis, g)) * cm_per_px(axis, g);
  return std::atan(offset_cm / g.viewing_distance_cm) * kRadToDeg;
}

double deg_to_px(double deg, Axis axis, const ScreenGeometry& g) {
  if (!std::isfinite(deg) || std::abs(deg) >= 90.0) {
    fail(ErrorCategory::InvalidArgument, "deg_to_px: angle must be finite and within (-90, 90)");
  }
  const double offset_cm = std::tan(deg / kRadToDeg) * g.viewing_distance_cm;
  return center_px(axis, g) + offset_cm / cm_per_px(axis, g);
}

double px_per_deg_at_center(Axis axis, const ScreenGeometry& g) {
  return g.viewing_distance_cm * std::tan(1.0 / kRadToDeg) / cm_per_px(axis, g);
}

GazeRecording::GazeRecording(std::string subject_id, std::string video_id, double sampling_rate_hz,
                             std::vector<GazeSample> samples)
    : subject_id_(std::move(subject_id)),
      video_id_(std::move(video_id)),
      sampling_rate_hz_(sampling_rate_hz),
      samples_(std::move(samples)) {
  if (!(sampling_rate_hz_ > 0) || !std::isfinite(sampling_rate_hz_)) {
    fail(ErrorCategory::InvalidArgument, "sampling rate must be positive");
  }
  const double period = sample_period_ms();
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!std::isfinite(s.timestamp_ms)) {
      fail(ErrorCategory::Data, "non-finite timestamp at sample " + std::to_string(i));
    }
    if (s.valid && !(std::isfinite(s.x_px) && std::isfinite(s.y_px))) {
      fail(ErrorCategory::Data, "valid sample with non-finite coordinates at sample " + std::to_string(i));
    }
    if (i > 0) {
      const double gap = s.timestamp_ms - samples_[i - 1].timestamp_ms;
      if (!(gap > 0)) {
        fail(ErrorCategory::Data, "timestamps not strictly increasing at sample " + std::to_string(i));
      }
      if (std::abs(gap - period) > 0.1 * period) {
        fail(ErrorCategory::Data, "sample gap " + text_io::format_double(gap) + " ms at sample " +
                                      std::to_string(i) + " deviates from the nominal period by more than 10%");
      }
    }
  }
}

double GazeRecording::invalid_fraction() const {
  if (samples_.empty()) return 1.0;
  const auto invalid = std::count_if(samples_.begin(), samples_.end(), [](const GazeSample& s) { return !s.valid; });
  return static_cast<double>(invalid) / static_cast<double>(samples_.size());
}

void VideoMeta::validate() const {
  if (!(frame_rate_hz > 0) || frame_count <= 0 || frame_width_px <= 0 || frame_height_px <= 0) {
    fail(ErrorCategory::InvalidArgument, "video metadata for '" + video_id + "' must be strictly positive");
  }
}

int align_fixation_to_frame(double onset_ms, double duration_ms, const VideoMeta& v) {
  const double center_s = (onset_ms + duration_ms / 2.0) / 1000.0;
  const double frame = std::floor(center_s * v.frame_rate_hz);
  if (!(frame > 0)) return 0;
  if (frame >= v.frame_count - 1) return v.frame_count - 1;
  return static_cast<int>(frame);
}

GazeRecording load_gaze_csv(const std::filesystem::path& path, std::string subject_id, std::string video_id,
                            double sampling_rate_hz) {
  const auto lines = text_io::read_lines(path);
  if (lines.empty() || text_io::trim(lines.front()) != "timestamp_ms,x_px,y_px,valid") {
    fail(ErrorCategory::Format, path.string() + ": expected header 'timestamp_ms,x_px,y_px,valid'");
  }
  std::vector<GazeSample> samples;
  samples.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text_io::trim(lines[i]).empty()) continue;
    const auto fields = text_io::split(lines[i], ',');
    const std::string ctx = path.string() + ":" + std::to_string(i + 1);
    if (fields.size() != 4) fail(ErrorCategory::Format, ctx + ": expected 4 fields");
    GazeSample s;
    s.timestamp_ms = text_io::parse_double(fields[0], ctx);
    s.valid = text_io::parse_int(fields[3], ctx) != 0;
    if (s.valid) {
      s.x_px = text_io::parse_double(fields[1], ctx);
      s.y_px = text_io::parse_double(fields[2], ctx);
    } else {
      s.x_px = text_io::trim(fields[1]).empty() ? std::nan("") : text_io::parse_double(fields[1], ctx);
      s.y_px = text_io::trim(fields[2]).empty() ? std::nan("") : text_io::parse_double(fields[2], ctx);
    }
    samples.push_back(s);
  }
  return GazeRecording(std::move(subject_id), std::move(video_id), sampling_rate_hz, std::move(samples));
}

void write_gaze_csv(const std::filesystem::path& path, const GazeRecording& r) {
  std::string out = "timestamp_ms,x_px,y_px,valid\n";
  for (const auto& s : r.samples()) {
    out += text_io::format_double(s.timestamp_ms);
    out += ',';
    if (s.valid) {
      out += text_io::format_double(s.x_px) + ',' + text_io::format_double(s.y_px) + ",1\n";
    } else {
      out += ",,0\n";
    }
  }
  text_io::write_file(path, out);
}

std::vector<SubjectLabel> load_labels_csv(const std::filesystem::path& path) {
  const auto lines = text_io::read_lines(path);
  if (lines.empty() || text_io::trim(lines.front()) != "subject_id,video_id,adhd_label,swan_score") {
    fail(ErrorCategory::Format, path.string() + ": expected header 'subject_id,video_id,adhd_label,swan_score'");
  }
  std::vector<SubjectLabel> labels;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text_io::trim(lines[i]).empty()) continue;
    const auto fields = text_io::split(lines[i], ',');
    const std::string ctx = path.string() + ":" + std::to_string(i + 1);
    if (fields.size() != 4) fail(ErrorCategory::Format, ctx + ": expected 4 fields");
    SubjectLabel l;
    l.subject_id = std::string(text_io::trim(fields[0]));
    l.video_id = std::string(text_io::trim(fields[1]));
    if (!text_io::trim(fields[2]).empty()) {
      const auto v = text_io::parse_int(fields[2], ctx);
      if (v != 0 && v != 1) fail(ErrorCategory::Format, ctx + ": adhd_label must be 0 or 1");
      l.adhd_label = static_cast<int>(v);
    }
    if (!text_io::trim(fields[3]).empty()) l.swan_score = text_io::parse_double(fields[3], ctx);
    labels.push_back(std::move(l));
  }
  return labels;
}

void write_labels_csv(const std::filesystem::path& path, const std::vector<SubjectLabel>& labels) {
  std::string out = "subject_id,video_id,adhd_label,swan_score\n";
  for (const auto& l : labels) {
    out += l.subject_id + ',' + l.video_id + ',';
    if (l.adhd_label) out += std::to_string(*l.adhd_label);
    out += ',';
    if (l.swan_score) out += text_io::format_double(*l.swan_score);
    out += '\n';
  }
  text_io::write_file(path, out);
}

}  // namespace gazenet
