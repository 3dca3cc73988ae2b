#include "gazenet/events.hpp"

#include <algorithm>
#include <cmath>

#include "gazenet/error.hpp"
#include "gazenet/text_io.hpp"

namespace gazenet {

void IdtConfig::validate(double sample_period_ms) const {
  if (!(dispersion_threshold_deg > 0) || !(min_duration_ms > 0) || !(max_gap_ms > 0)) {
    fail(ErrorCategory::InvalidArgument, "I-DT thresholds must be strictly positive");
  }
  // Tolerance mirrors the +-10% sample-period jitter admitted by GazeRecording.
  if (min_duration_ms < 2.0 * sample_period_ms * 0.9) {
    fail(ErrorCategory::InvalidArgument, "I-DT minimum duration must span at least two sample periods");
  }
}

std::vector<std::vector<DegreeSample>> segment_recording(const GazeRecording& r, const ScreenGeometry& g,
                                                         const IdtConfig& c) {
  std::vector<std::vector<DegreeSample>> segments;
  std::vector<DegreeSample> current;
  for (const auto& s : r.samples()) {
    if (!s.valid) continue;
    if (!current.empty() && s.timestamp_ms - current.back().t_ms > c.max_gap_ms) {
      segments.push_back(std::move(current));
      current.clear();
    }
    current.push_back({s.timestamp_ms, px_to_deg(s.x_px, Axis::Horizontal, g), px_to_deg(s.y_px, Axis::Vertical, g)});
  }
  if (!current.empty()) segments.push_back(std::move(current));
  return segments;
}

std::vector<Fixation> detect_fixations_in_segment(const std::vector<DegreeSample>& seg, const IdtConfig& c) {
  std::vector<Fixation> out;
  const std::size_t n = seg.size();
  std::size_t start = 0;
  while (start < n) {
    // Smallest window starting at `start` whose span reaches min_duration.
    std::size_t end = start;
    while (end < n && seg[end].t_ms - seg[start].t_ms < c.min_duration_ms) ++end;
    if (end >= n) break;

    double min_x = seg[start].x_deg, max_x = min_x;
    double min_y = seg[start].y_deg, max_y = min_y;
    for (std::size_t i = start + 1; i <= end; ++i) {
      min_x = std::min(min_x, seg[i].x_deg);
      max_x = std::max(max_x, seg[i].x_deg);
      min_y = std::min(min_y, seg[i].y_deg);
      max_y = std::max(max_y, seg[i].y_deg);
    }
    if ((max_x - min_x) + (max_y - min_y) > c.dispersion_threshold_deg) {
      ++start;
      continue;
    }
    while (end + 1 < n) {
      const auto& nx = seg[end + 1];
      const double dx = std::max(max_x, nx.x_deg) - std::min(min_x, nx.x_deg);
      const double dy = std::max(max_y, nx.y_deg) - std::min(min_y, nx.y_deg);
      if (dx + dy > c.dispersion_threshold_deg) break;
      min_x = std::min(min_x, nx.x_deg);
      max_x = std::max(max_x, nx.x_deg);
      min_y = std::min(min_y, nx.y_deg);
      max_y = std::max(max_y, nx.y_deg);
      ++end;
    }
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = start; i <= end; ++i) {
      sx += seg[i].x_deg;
      sy += seg[i].y_deg;
    }
    const double count = static_cast<double>(end - start + 1);
    Fixation f;
    f.x_deg = sx / count;
    f.y_deg = sy / count;
    f.onset_ms = seg[start].t_ms;
    f.duration_ms = seg[end].t_ms - seg[start].t_ms;
    out.push_back(f);
    start = end + 1;
  }
  return out;
}

Scanpath detect_fixations(const GazeRecording& r, const ScreenGeometry& g, const IdtConfig& c) {
  g.validate();
  c.validate(r.sample_period_ms());
  Scanpath sp;
  sp.subject_id = r.subject_id();
  sp.video_id = r.video_id();
  const auto segments = segment_recording(r, g, c);
  const bool any_usable = std::any_of(segments.begin(), segments.end(), [](const auto& s) { return s.size() >= 2; });
  if (!any_usable) {
    sp.unusable = true;
    return sp;
  }
  for (const auto& seg : segments) {
    auto fixations = detect_fixations_in_segment(seg, c);
    sp.fixations.insert(sp.fixations.end(), fixations.begin(), fixations.end());
  }
  return sp;
}

void align_frames(Scanpath& sp, const VideoMeta& v) {
  for (auto& f : sp.fixations) f.center_frame = align_fixation_to_frame(f.onset_ms, f.duration_ms, v);
}

void write_fixations_csv(const std::filesystem::path& path, const Scanpath& sp) {
  std::string out = "onset_ms,duration_ms,x_deg,y_deg,center_frame\n";
  for (const auto& f : sp.fixations) {
    out += text_io::format_double(f.onset_ms) + ',' + text_io::format_double(f.duration_ms) + ',' +
           text_io::format_double(f.x_deg) + ',' + text_io::format_double(f.y_deg) + ',' +
           std::to_string(f.center_frame) + '\n';
  }
  text_io::write_file(path, out);
}

Scanpath load_fixations_csv(const std::filesystem::path& path, std::string subject_id, std::string video_id) {
  const auto lines = text_io::read_lines(path);
  if (lines.empty() || text_io::trim(lines.front()) != "onset_ms,duration_ms,x_deg,y_deg,center_frame") {
    fail(ErrorCategory::Format, path.string() + ": expected fixation header");
  }
  Scanpath sp;
  sp.subject_id = std::move(subject_id);
  sp.video_id = std::move(video_id);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text_io::trim(lines[i]).empty()) continue;
    const auto fields = text_io::split(lines[i], ',');
    const std::string ctx = path.string() + ":" + std::to_string(i + 1);
    if (fields.size() != 5) fail(ErrorCategory::Format, ctx + ": expected 5 fields");
    Fixation f;
    f.onset_ms = text_io::parse_double(fields[0], ctx);
    f.duration_ms = text_io::parse_double(fields[1], ctx);
    f.x_deg = text_io::parse_double(fields[2], ctx);
    f.y_deg = text_io::parse_double(fields[3], ctx);
    f.center_frame = static_cast<int>(text_io::parse_int(fields[4], ctx));
    sp.fixations.push_back(f);
  }
  sp.unusable = sp.fixations.empty();
  return sp;
}

}  // namespace gazenet
