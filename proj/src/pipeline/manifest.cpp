#include "gazenet/pipeline/manifest.hpp"

#include <set>

#include "gazenet/error.hpp"
#include "gazenet/text_io.hpp"

namespace gazenet::pipeline {

namespace fs = std::filesystem;

std::vector<const SubjectEntry*> Manifest::classification_subjects(const std::string& video_id) const {
  std::vector<const SubjectEntry*> out;
  for (const auto& s : subjects) {
    if (s.video_id == video_id && s.label.adhd_label) out.push_back(&s);
  }
  return out;
}

std::vector<const SubjectEntry*> Manifest::pretrain_subjects() const {
  std::vector<const SubjectEntry*> out;
  for (const auto& s : subjects) {
    if (!s.label.adhd_label && s.label.swan_score) out.push_back(&s);
  }
  return out;
}

std::vector<std::string> Manifest::video_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, v] : videos) out.push_back(id);
  return out;
}

Manifest load_manifest(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorCategory::Io, "manifest " + path.string() + " not found");
  const auto lines = text_io::read_lines(path);
  Manifest m;
  m.root = path.parent_path();
  std::vector<fs::path> label_files;
  std::set<std::pair<std::string, std::string>> seen;

  auto where = [&](std::size_t i) { return path.string() + ":" + std::to_string(i + 1); };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text_io::trim(line);
    if (line.empty()) continue;
    if (line.rfind("root=", 0) == 0) {
      const fs::path r(std::string(line.substr(5)));
      m.root = r.is_absolute() ? r : path.parent_path() / r;
      continue;
    }
    std::vector<std::string> f;
    for (auto& tok : text_io::split(line, ' ')) {
      if (!tok.empty()) f.push_back(tok);
    }
    if (f[0] == "video" && f.size() == 7) {
      VideoEntry v;
      v.meta.video_id = f[1];
      v.meta.frame_rate_hz = text_io::parse_double(f[2], where(i));
      v.meta.frame_count = static_cast<int>(text_io::parse_int(f[3], where(i)));
      v.meta.frame_width_px = static_cast<int>(text_io::parse_int(f[4], where(i)));
      v.meta.frame_height_px = static_cast<int>(text_io::parse_int(f[5], where(i)));
      v.meta.validate();
      v.saliency_dir = f[6];
      if (!m.videos.emplace(v.meta.video_id, v).second) fail(ErrorCategory::Format, where(i) + ": duplicate video");
    } else if (f[0] == "subject" && f.size() == 5) {
      SubjectEntry s;
      s.subject_id = f[1];
      s.video_id = f[2];
      s.gaze_file = f[3];
      s.sampling_rate_hz = text_io::parse_double(f[4], where(i));
      if (!(s.sampling_rate_hz > 0)) fail(ErrorCategory::Format, where(i) + ": sampling rate must be positive");
      if (!seen.emplace(s.subject_id, s.video_id).second) {
        fail(ErrorCategory::Format, where(i) + ": duplicate subject " + s.subject_id + " for video " + s.video_id);
      }
      m.subjects.push_back(std::move(s));
    } else if (f[0] == "labels" && f.size() == 2) {
      label_files.emplace_back(f[1]);
    } else {
      fail(ErrorCategory::Format, where(i) + ": unrecognized manifest line");
    }
  }

  for (auto& [id, v] : m.videos) {
    v.saliency_dir = m.root / v.saliency_dir;
    if (!fs::is_directory(v.saliency_dir)) {
      fail(ErrorCategory::Io, "saliency directory " + v.saliency_dir.string() + " for video " + id + " not found");
    }
  }
  std::map<std::pair<std::string, std::string>, SubjectLabel> labels;
  for (const auto& lf : label_files) {
    for (auto& l : load_labels_csv(m.root / lf)) labels[{l.subject_id, l.video_id}] = l;
  }
  for (auto& s : m.subjects) {
    if (!m.videos.count(s.video_id)) fail(ErrorCategory::Format, "subject " + s.subject_id + ": unknown video " + s.video_id);
    s.gaze_file = m.root / s.gaze_file;
    if (!fs::exists(s.gaze_file)) fail(ErrorCategory::Io, "gaze file " + s.gaze_file.string() + " not found");
    auto it = labels.find({s.subject_id, s.video_id});
    if (it == labels.end()) fail(ErrorCategory::Data, "subject " + s.subject_id + " has no label row");
    s.label = it->second;
  }
  return m;
}

std::string manifest_text(const Manifest& m) {
  std::string out = "root=.\n";
  for (const auto& [id, v] : m.videos) {
    out += "video " + id + " " + text_io::format_double(v.meta.frame_rate_hz) + " " +
           std::to_string(v.meta.frame_count) + " " + std::to_string(v.meta.frame_width_px) + " " +
           std::to_string(v.meta.frame_height_px) + " " + v.saliency_dir.generic_string() + "\n";
  }
  for (const auto& s : m.subjects) {
    out += "subject " + s.subject_id + " " + s.video_id + " " + s.gaze_file.generic_string() + " " +
           text_io::format_double(s.sampling_rate_hz) + "\n";
  }
  out += "labels labels.csv\n";
  return out;
}

}  // namespace gazenet::pipeline
