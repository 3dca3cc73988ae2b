#include "gazenet/pipeline/workspace.hpp"

#include <cstdio>

#include "gazenet/error.hpp"
#include "gazenet/text_io.hpp"

namespace gazenet::pipeline {

namespace fs = std::filesystem;

WorkspaceLock::WorkspaceLock(const fs::path& dir) : path_(dir / ".lock") {
  fs::create_directories(dir);
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (f == nullptr) {
    fail(ErrorCategory::Io, "workspace " + dir.string() + " is locked by another command (remove " +
                                path_.string() + " if stale)");
  }
  std::fclose(f);
}

WorkspaceLock::~WorkspaceLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

fs::path Workspace::fixation_index(const std::string& video) const { return root / "fixations" / video / "index.csv"; }
fs::path Workspace::fixations(const std::string& video, const std::string& subject) const {
  return root / "fixations" / video / (subject + ".csv");
}
fs::path Workspace::saliency_values(const std::string& video, const std::string& subject) const {
  return root / "saliency" / video / (subject + ".csv");
}
fs::path Workspace::features(const std::string& video, const std::string& subject) const {
  return root / "features" / video / (subject + ".feat");
}
fs::path Workspace::pretrain_checkpoint() const { return root / "models" / "pretrain.ckpt"; }
fs::path Workspace::pretrain_stats() const { return root / "models" / "pretrain_stats.csv"; }
fs::path Workspace::model_checkpoint(const std::string& video, const std::string& kind) const {
  return root / "models" / video / (kind + ".ckpt");
}
fs::path Workspace::model_stats(const std::string& video, const std::string& kind) const {
  return root / "models" / video / (kind + "_stats.csv");
}
fs::path Workspace::eval_dir() const { return root / "eval"; }
fs::path Workspace::baselines_dir() const { return root / "baselines"; }
fs::path Workspace::attribution_dir() const { return root / "attribution"; }
fs::path Workspace::hyper_dir() const { return root / "hyper"; }
fs::path Workspace::report_dir() const { return root / "report"; }
fs::path Workspace::log_file(const std::string& command) const { return root / "logs" / (command + ".log"); }

void write_channel_stats(const fs::path& path, const ChannelStats& s) {
  std::string out = "channel,mean,std\n";
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    out += std::string(channel_name(c)) + "," + text_io::format_double(s.mean[c]) + "," +
           text_io::format_double(s.stddev[c]) + "\n";
  }
  out += "fitted_on," + s.fitted_on + "\n";
  text_io::write_file(path, out);
}

ChannelStats read_channel_stats(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorCategory::Io, "normalization statistics " + path.string() + " not found");
  const auto lines = text_io::read_lines(path);
  if (lines.size() < kNumChannels + 2 || lines[0] != "channel,mean,std") {
    fail(ErrorCategory::Format, path.string() + ": malformed statistics file");
  }
  ChannelStats s;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const auto f = text_io::split(lines[c + 1], ',');
    if (f.size() != 3 || f[0] != channel_name(c)) fail(ErrorCategory::Format, path.string() + ": bad channel row");
    s.mean[c] = text_io::parse_double(f[1], path.string());
    s.stddev[c] = text_io::parse_double(f[2], path.string());
  }
  const auto last = text_io::split(lines[kNumChannels + 1], ',');
  if (last.size() != 2 || last[0] != "fitted_on") fail(ErrorCategory::Format, path.string() + ": missing fitted_on");
  s.fitted_on = last[1];
  return s;
}

void write_fixation_index(const fs::path& path, const std::vector<IndexRow>& rows) {
  std::string out = "subject_id,status,n_fixations\n";
  for (const auto& r : rows) out += r.subject_id + "," + r.status + "," + std::to_string(r.n_fixations) + "\n";
  text_io::write_file(path, out);
}

std::vector<IndexRow> read_fixation_index(const fs::path& path) {
  const auto lines = text_io::read_lines(path);
  if (lines.empty() || lines[0] != "subject_id,status,n_fixations") {
    fail(ErrorCategory::Format, path.string() + ": not a fixation index");
  }
  std::vector<IndexRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text_io::trim(lines[i]).empty()) continue;
    const auto f = text_io::split(lines[i], ',');
    if (f.size() != 3) fail(ErrorCategory::Format, path.string() + ": malformed index row");
    rows.push_back({f[0], f[1], static_cast<std::size_t>(text_io::parse_int(f[2], path.string()))});
  }
  return rows;
}

std::string file_hash(const fs::path& path) { return text_io::hex64(text_io::fnv1a(text_io::read_file(path))); }

}  // namespace gazenet::pipeline
