#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gazenet/features.hpp"

namespace gazenet::pipeline {

// Exclusive marker file `<dir>/.lock`, removed on destruction.
class WorkspaceLock {
 public:
  explicit WorkspaceLock(const std::filesystem::path& dir);
  ~WorkspaceLock();
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  std::filesystem::path path_;
};

// Artifact layout of a pipeline workspace.
struct Workspace {
  std::filesystem::path root;

  std::filesystem::path fixation_index(const std::string& video) const;
  std::filesystem::path fixations(const std::string& video, const std::string& subject) const;
  std::filesystem::path saliency_values(const std::string& video, const std::string& subject) const;
  std::filesystem::path features(const std::string& video, const std::string& subject) const;
  std::filesystem::path pretrain_checkpoint() const;
  std::filesystem::path pretrain_stats() const;
  std::filesystem::path model_checkpoint(const std::string& video, const std::string& kind) const;
  std::filesystem::path model_stats(const std::string& video, const std::string& kind) const;
  std::filesystem::path eval_dir() const;
  std::filesystem::path baselines_dir() const;
  std::filesystem::path attribution_dir() const;
  std::filesystem::path hyper_dir() const;
  std::filesystem::path report_dir() const;
  std::filesystem::path log_file(const std::string& command) const;
};

// Per-channel normalization statistics: `channel,mean,std` rows plus a
// `fitted_on,<id>` line.
void write_channel_stats(const std::filesystem::path& path, const ChannelStats& s);
ChannelStats read_channel_stats(const std::filesystem::path& path);

// Fixation index rows `subject_id,status,n_fixations`; status is `ok`,
// `tracker_loss` or `unusable`.
struct IndexRow {
  std::string subject_id;
  std::string status;
  std::size_t n_fixations = 0;
};
void write_fixation_index(const std::filesystem::path& path, const std::vector<IndexRow>& rows);
std::vector<IndexRow> read_fixation_index(const std::filesystem::path& path);

// Content hash of a file (FNV-1a, hex).
std::string file_hash(const std::filesystem::path& path);

}  // namespace gazenet::pipeline
