#include "gazenet/pipeline/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gazenet/error.hpp"
#include "gazenet/pipeline/manifest.hpp"
#include "gazenet/saliency.hpp"
#include "gazenet/text_io.hpp"

namespace gazenet::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr double kMeanDurationMs = 260.0;
constexpr double kDurationSdMs = 60.0;
constexpr double kMinDurationMs = 130.0;
constexpr double kMaxDurationMs = 600.0;
constexpr double kBaseTargeting = 0.75;
constexpr double kBlobSigmaDeg = 2.0;
constexpr double kMinSaccadeDeg = 4.0;
constexpr double kFixationJitterDeg = 0.04;
constexpr double kFieldX = 20.0;
constexpr double kFieldY = 11.0;

struct Point {
  double x, y;
};

// Two salient blobs drifting on Lissajous paths, in degrees.
Point blob_position(int blob, double t_s) {
  const double phase = blob == 0 ? 0.0 : 2.1;
  const double wx = blob == 0 ? 0.31 : 0.23;
  const double wy = blob == 0 ? 0.19 : 0.37;
  return {14.0 * std::sin(wx * t_s + phase), 7.0 * std::sin(wy * t_s + 1.3 * phase + 0.4)};
}

struct Event {
  bool fixation;
  double onset, duration;
  Point from, to;
};

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

void SynthSpec::validate() const {
  if (n_adhd <= 0 || n_control <= 0) fail(ErrorCategory::Config, "synth: both groups need at least one subject");
  if (n_pretrain < 0) fail(ErrorCategory::Config, "synth: n_pretrain must be non-negative");
  if (!(effect_duration >= 0) || !(effect_saliency >= 0)) fail(ErrorCategory::Config, "synth: effects must be >= 0");
  if (!(severity_sd >= 0) || !(subject_jitter_sd >= 0) || !(swan_noise_sd >= 0)) {
    fail(ErrorCategory::Config, "synth: spreads must be >= 0");
  }
  if (frames < 1 || !(fps > 0) || !(sampling_rate_hz > 0) || raster_width < 2 || raster_height < 2) {
    fail(ErrorCategory::Config, "synth: invalid video or raster size");
  }
  if (video_id.empty() || video_id.find_first_of(" ,\t") != std::string::npos) {
    fail(ErrorCategory::Config, "synth: video id must be a single token");
  }
  screen.validate();
}

SynthSummary generate_synthetic(const SynthSpec& spec, const fs::path& dir) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  // Saliency rasters.
  const fs::path sal_rel = fs::path("saliency") / spec.video_id;
  fs::create_directories(dir / sal_rel);
  for (int f = 0; f < spec.frames; ++f) {
    const double t_s = f / spec.fps;
    std::vector<double> v(static_cast<std::size_t>(spec.raster_width * spec.raster_height));
    for (int r = 0; r < spec.raster_height; ++r) {
      const double y = px_to_deg((r + 0.5) * spec.screen.height_px / spec.raster_height, Axis::Vertical, spec.screen);
      for (int c = 0; c < spec.raster_width; ++c) {
        const double x =
            px_to_deg((c + 0.5) * spec.screen.width_px / spec.raster_width, Axis::Horizontal, spec.screen);
        double s = 0.0;
        for (int b = 0; b < 2; ++b) {
          const Point p = blob_position(b, t_s);
          const double d2 = (x - p.x) * (x - p.x) + (y - p.y) * (y - p.y);
          s += std::exp(-d2 / (2 * kBlobSigmaDeg * kBlobSigmaDeg));
        }
        v[static_cast<std::size_t>(r * spec.raster_width + c)] = s;
      }
    }
    write_saliency_file(saliency_frame_path(dir / sal_rel, f),
                        SaliencyMap(f, spec.raster_height, spec.raster_width, std::move(v)));
  }

  Manifest m;
  VideoEntry video;
  video.meta.video_id = spec.video_id;
  video.meta.frame_rate_hz = spec.fps;
  video.meta.frame_count = spec.frames;
  video.meta.frame_width_px = spec.screen.width_px;
  video.meta.frame_height_px = spec.screen.height_px;
  video.saliency_dir = sal_rel;
  m.videos[spec.video_id] = video;
  const double video_ms = video.meta.duration_ms();

  // Group membership is shuffled so labels do not follow id order.
  std::vector<int> groups;
  groups.insert(groups.end(), static_cast<std::size_t>(spec.n_adhd), 1);
  groups.insert(groups.end(), static_cast<std::size_t>(spec.n_control), 0);
  std::shuffle(groups.begin(), groups.end(), rng);
  groups.insert(groups.end(), static_cast<std::size_t>(spec.n_pretrain), -1);

  SynthSummary summary;
  std::vector<SubjectLabel> labels;
  std::string planted = "subject_id,planted_fixations\n";
  int n_class = 0, n_pre = 0;
  for (int g : groups) {
    char id[16];
    if (g >= 0) {
      std::snprintf(id, sizeof id, "s%04d", ++n_class);
    } else {
      std::snprintf(id, sizeof id, "p%04d", ++n_pre);
    }
    SubjectLabel label;
    label.subject_id = id;
    label.video_id = spec.video_id;
    double a;
    if (g >= 0) {
      a = g + spec.severity_sd * normal(rng);
      label.adhd_label = g;
    } else {
      a = 0.5 + 0.5 * normal(rng);
      label.swan_score = a + spec.swan_noise_sd * normal(rng);
    }
    const double jit_d = spec.subject_jitter_sd * normal(rng);
    const double jit_s = spec.subject_jitter_sd * normal(rng);
    const double sd_target = std::sqrt(kBaseTargeting * (1 - kBaseTargeting));
    const double p_target =
        std::clamp(kBaseTargeting - sd_target * (spec.effect_saliency * a - jit_s), 0.02, 0.98);

    // Planted timeline: fixation, saccade, fixation, ... ending on a fixation.
    std::vector<Event> events;
    double t = 0.0;
    Point prev{kFieldX * (2 * uniform(rng) - 1), kFieldY * (2 * uniform(rng) - 1)};
    bool first = true;
    int n_fix = 0;
    while (true) {
      const double dur = std::clamp(
          kMeanDurationMs + kDurationSdMs * (normal(rng) - spec.effect_duration * a + jit_d), kMinDurationMs,
          kMaxDurationMs);
      Point pos = prev;
      double sacc = 0.0;
      if (!first) {
        bool placed = false;
        if (uniform(rng) < p_target) {
          const int start = uniform(rng) < 0.5 ? 0 : 1;
          for (int k = 0; k < 2 && !placed; ++k) {
            // Saccade length is not known yet; aim at the blob position at
            // the expected fixation centre.
            const Point b = blob_position((start + k) % 2, (t + 50.0 + dur / 2) / 1000.0);
            const Point cand{b.x + 0.3 * normal(rng), b.y + 0.3 * normal(rng)};
            if (distance(cand, prev) >= kMinSaccadeDeg) {
              pos = cand;
              placed = true;
            }
          }
        }
        while (!placed) {
          const Point cand{kFieldX * (2 * uniform(rng) - 1), kFieldY * (2 * uniform(rng) - 1)};
          if (distance(cand, prev) >= kMinSaccadeDeg) {
            pos = cand;
            placed = true;
          }
        }
        sacc = 30.0 + 2.0 * distance(pos, prev);
      }
      if (t + sacc + dur > video_ms) break;
      if (!first) events.push_back({false, t, sacc, prev, pos});
      t += sacc;
      events.push_back({true, t, dur, pos, pos});
      t += dur;
      prev = pos;
      first = false;
      ++n_fix;
    }

    std::vector<GazeSample> samples;
    const double period = 1000.0 / spec.sampling_rate_hz;
    std::size_t e = 0;
    for (long i = 0;; ++i) {
      const double ts = static_cast<double>(i) * period;
      if (ts > t) break;
      while (e + 1 < events.size() && ts >= events[e].onset + events[e].duration) ++e;
      const Event& ev = events[e];
      Point p;
      if (ev.fixation) {
        p = {ev.to.x + kFixationJitterDeg * normal(rng), ev.to.y + kFixationJitterDeg * normal(rng)};
      } else {
        // In-flight samples stay clear of both endpoints so they never join a fixation window.
        const double u = 0.3 + 0.4 * std::clamp((ts - ev.onset) / ev.duration, 0.0, 1.0);
        p = {ev.from.x + u * (ev.to.x - ev.from.x), ev.from.y + u * (ev.to.y - ev.from.y)};
      }
      samples.push_back({ts, deg_to_px(p.x, Axis::Horizontal, spec.screen),
                         deg_to_px(p.y, Axis::Vertical, spec.screen), true});
    }
    const fs::path gaze_rel = fs::path("gaze") / (std::string(id) + ".csv");
    write_gaze_csv(dir / gaze_rel, GazeRecording(id, spec.video_id, spec.sampling_rate_hz, std::move(samples)));

    SubjectEntry entry;
    entry.subject_id = id;
    entry.video_id = spec.video_id;
    entry.gaze_file = gaze_rel;
    entry.sampling_rate_hz = spec.sampling_rate_hz;
    m.subjects.push_back(entry);
    labels.push_back(label);
    summary.planted_fixations[id] = n_fix;
    planted += std::string(id) + "," + std::to_string(n_fix) + "\n";
  }

  write_labels_csv(dir / "labels.csv", labels);
  text_io::write_file(dir / "planted.csv", planted);
  summary.manifest = dir / "manifest.txt";
  text_io::write_file(summary.manifest, manifest_text(m));
  return summary;
}

}  // namespace gazenet::pipeline
