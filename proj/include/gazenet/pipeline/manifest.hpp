#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gazenet/core.hpp"

namespace gazenet::pipeline {

struct VideoEntry {
  VideoMeta meta;
  std::filesystem::path saliency_dir;
};

struct SubjectEntry {
  std::string subject_id;
  std::string video_id;
  std::filesystem::path gaze_file;
  double sampling_rate_hz = 0.0;
  SubjectLabel label;  // adhd_label and/or swan_score
};

// Line-based dataset manifest:
//   root=<dir>                                   (relative to the manifest file)
//   video <id> <fps> <frames> <width_px> <height_px> <saliency_dir>
//   subject <id> <video_id> <gaze_file> <sampling_rate_hz>
//   labels <labels_csv>
// Paths other than root are relative to root. `#` starts a comment.
struct Manifest {
  std::filesystem::path root;
  std::map<std::string, VideoEntry> videos;
  std::vector<SubjectEntry> subjects;  // manifest order

  // Subjects of one video with an ADHD label (the classification set).
  std::vector<const SubjectEntry*> classification_subjects(const std::string& video_id) const;
  // Subjects with a SWAN score and no ADHD label (the pre-training set).
  std::vector<const SubjectEntry*> pretrain_subjects() const;
  std::vector<std::string> video_ids() const;
};

// Validates references: files exist, ids unique per video, videos known,
// every subject has a label row.
Manifest load_manifest(const std::filesystem::path& path);

std::string manifest_text(const Manifest& m);

}  // namespace gazenet::pipeline
