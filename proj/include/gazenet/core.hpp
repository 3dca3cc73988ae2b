#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gazenet {

// Physical screen layout used to express gaze positions in degrees of visual
// angle. Defaults describe a 1920x1080 display, 52x29 cm, viewed from 60 cm.
struct ScreenGeometry {
  int width_px = 1920;
  int height_px = 1080;
  double width_cm = 52.0;
  double height_cm = 29.0;
  double viewing_distance_cm = 60.0;

  void validate() const;
};

enum class Axis { Horizontal, Vertical };

// Visual angle (degrees) of a pixel coordinate, measured from the screen
// centre along one axis. Positive to the right / downwards.
double px_to_deg(double px, Axis axis, const ScreenGeometry& g);
double deg_to_px(double deg, Axis axis, const ScreenGeometry& g);

// Pixels per degree of visual angle at the screen centre.
double px_per_deg_at_center(Axis axis, const ScreenGeometry& g);

struct GazeSample {
  double timestamp_ms = 0.0;
  double x_px = 0.0;
  double y_px = 0.0;
  bool valid = true;
};

// Raw monocular gaze for one subject watching one video. Timestamps are
// relative to video onset.
class GazeRecording {
 public:
  GazeRecording(std::string subject_id, std::string video_id, double sampling_rate_hz,
                std::vector<GazeSample> samples);

  const std::string& subject_id() const { return subject_id_; }
  const std::string& video_id() const { return video_id_; }
  double sampling_rate_hz() const { return sampling_rate_hz_; }
  double sample_period_ms() const { return 1000.0 / sampling_rate_hz_; }
  const std::vector<GazeSample>& samples() const { return samples_; }

  // Fraction of samples flagged as tracker loss.
  double invalid_fraction() const;

 private:
  std::string subject_id_;
  std::string video_id_;
  double sampling_rate_hz_;
  std::vector<GazeSample> samples_;
};

// Maximum tolerated tracker-loss fraction for recordings admitted by the
// loader's quality filter.
inline constexpr double kMaxTrackerLoss = 0.10;

struct Fixation {
  double x_deg = 0.0;
  double y_deg = 0.0;
  double duration_ms = 0.0;
  double onset_ms = 0.0;
  int center_frame = 0;
};

struct Scanpath {
  std::string subject_id;
  std::string video_id;
  std::vector<Fixation> fixations;
  // Set by detection when the recording was too short or empty to yield
  // any usable event stream.
  bool unusable = false;

  std::size_t size() const { return fixations.size(); }
  bool empty() const { return fixations.empty(); }
};

struct VideoMeta {
  std::string video_id;
  double frame_rate_hz = 30.0;
  int frame_count = 1;
  int frame_width_px = 1920;
  int frame_height_px = 1080;

  void validate() const;
  double duration_ms() const { return 1000.0 * frame_count / frame_rate_hz; }
};

struct SubjectLabel {
  std::string subject_id;
  std::string video_id;
  std::optional<int> adhd_label;
  std::optional<double> swan_score;
};

// Index of the video frame shown at the temporal centre of a fixation,
// clamped to the valid frame range.
int align_fixation_to_frame(double onset_ms, double duration_ms, const VideoMeta& v);

// Gaze sample CSV: header `timestamp_ms,x_px,y_px,valid`.
GazeRecording load_gaze_csv(const std::filesystem::path& path, std::string subject_id,
                            std::string video_id, double sampling_rate_hz);
void write_gaze_csv(const std::filesystem::path& path, const GazeRecording& r);

// Label CSV: header `subject_id,video_id,adhd_label,swan_score`, empty fields
// for absent values.
std::vector<SubjectLabel> load_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const std::filesystem::path& path, const std::vector<SubjectLabel>& labels);

}  // namespace gazenet
