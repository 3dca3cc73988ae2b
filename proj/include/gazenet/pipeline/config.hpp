#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>

namespace gazenet::pipeline {

// Flat key=value configuration. Every key has a built-in default; files and
// command-line overrides may only set known keys.
class Config {
 public:
  Config();

  // `#` starts a comment; blank lines are ignored.
  void load_file(const std::filesystem::path& path);
  // Each entry is `key=value`.
  void apply_overrides(std::span<const std::string> assignments);
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::uint64_t get_seed() const;

  // Sorted `key=value` lines; the hash is taken over this text.
  std::string canonical() const;
  std::string hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace gazenet::pipeline
