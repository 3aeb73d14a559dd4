#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#ifndef FRFVIB_VERSION
#define FRFVIB_VERSION "unknown"
#endif

namespace frfvib::cli {
namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
}

std::string iso_time(double seconds) {
  const std::time_t t = static_cast<std::time_t>(seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

std::string sha256_hex(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("SHA-256 unavailable");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return os.str();
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.parent_path() / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RunManifest::RunManifest(std::filesystem::path out_dir, std::string command)
    : out_dir_(std::move(out_dir)), command_(std::move(command)), started_(now_seconds()) {
  std::filesystem::create_directories(out_dir_);
}

void RunManifest::write_file(const std::string& name, const std::string& content) {
  const auto path = out_dir_ / name;
  write_atomically(path, content);
  for (auto& e : entries_) {
    if (e.file == name) {
      e.sha256 = sha256_hex(path);
      e.bytes = std::filesystem::file_size(path);
      return;
    }
  }
  entries_.push_back({name, sha256_hex(path), std::filesystem::file_size(path)});
}

void RunManifest::set_config(std::string config_path, std::string snapshot_json) {
  config_path_ = std::move(config_path);
  snapshot_ = std::move(snapshot_json);
}

void RunManifest::set_status(std::string status, int exit_code) {
  status_ = std::move(status);
  exit_code_ = exit_code;
}

void RunManifest::add_note(const std::string& key, const std::string& json_value) {
  notes_.emplace_back(key, json_value);
}

void RunManifest::finish() {
  using nlohmann::json;
  const double end = now_seconds();
  json j;
  j["tool"] = "frfvib";
  j["version"] = FRFVIB_VERSION;
  j["command"] = command_;
  j["config_path"] = config_path_;
  j["config"] = snapshot_.empty() ? json(nullptr) : json::parse(snapshot_);
  j["seed"] = seed_;
  j["jobs"] = jobs_;
  j["started_at"] = iso_time(started_);
  j["wall_seconds"] = end - started_;
  j["status"] = status_;
  j["exit_code"] = exit_code_;
  json files = json::array();
  for (const auto& e : entries_) {
    files.push_back({{"file", e.file}, {"sha256", e.sha256}, {"bytes", e.bytes}});
  }
  j["outputs"] = files;
  for (const auto& [k, v] : notes_) j[k] = json::parse(v);
  write_atomically(out_dir_ / "manifest.json", j.dump(2) + "\n");
}

}  // namespace frfvib::cli
