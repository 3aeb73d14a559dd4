#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace frfvib::cli {

std::string sha256_hex(const std::filesystem::path& file);

struct ManifestEntry {
  std::string file;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Records every file written by a command; writes manifest.json at the end.
class RunManifest {
 public:
  RunManifest(std::filesystem::path out_dir, std::string command);

  /// Writes `content` to out_dir/name via a temporary file and records its checksum.
  void write_file(const std::string& name, const std::string& content);

  void set_config(std::string config_path, std::string snapshot_json);
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void set_jobs(int jobs) { jobs_ = jobs; }
  void set_status(std::string status, int exit_code);
  void add_note(const std::string& key, const std::string& json_value);

  /// Writes manifest.json atomically.
  void finish();

  const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }
  const std::filesystem::path& out_dir() const noexcept { return out_dir_; }

 private:
  std::filesystem::path out_dir_;
  std::string command_;
  std::string config_path_;
  std::string snapshot_;
  std::uint64_t seed_ = 0;
  int jobs_ = 0;
  std::string status_ = "unknown";
  int exit_code_ = 0;
  std::vector<std::pair<std::string, std::string>> notes_;
  std::vector<ManifestEntry> entries_;
  double started_;
};

/// Writes `content` to `path` through a sibling temporary and a rename.
void write_atomically(const std::filesystem::path& path, const std::string& content);

}  // namespace frfvib::cli
