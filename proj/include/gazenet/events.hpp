#pragma once

#include <filesystem>
#include <vector>

#include "gazenet/core.hpp"

namespace gazenet {

struct IdtConfig {
  double dispersion_threshold_deg = 1.0;
  double min_duration_ms = 100.0;
  // Gaps between consecutive valid samples longer than this split the
  // stream into independent segments.
  double max_gap_ms = 75.0;

  void validate(double sample_period_ms) const;
};

// A gaze sample expressed in degrees of visual angle.
struct DegreeSample {
  double t_ms;
  double x_deg;
  double y_deg;
};

// Valid samples converted to degrees, split at tracker-loss gaps.
std::vector<std::vector<DegreeSample>> segment_recording(const GazeRecording& r, const ScreenGeometry& g,
                                                         const IdtConfig& c);

// Dispersion-threshold fixation detection over one contiguous segment.
// Returned fixations have center_frame = 0; use align_frames to fill it.
std::vector<Fixation> detect_fixations_in_segment(const std::vector<DegreeSample>& segment, const IdtConfig& c);

// Full I-DT pass over a recording. A recording with no segment of at least
// two valid samples yields an empty scanpath flagged unusable.
Scanpath detect_fixations(const GazeRecording& r, const ScreenGeometry& g, const IdtConfig& c);

void align_frames(Scanpath& sp, const VideoMeta& v);

// Fixation interchange file: `onset_ms,duration_ms,x_deg,y_deg,center_frame`.
void write_fixations_csv(const std::filesystem::path& path, const Scanpath& sp);
Scanpath load_fixations_csv(const std::filesystem::path& path, std::string subject_id, std::string video_id);

}  // namespace gazenet
