#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>

namespace depsentry::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("depsentry-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  void write(const std::string& rel, const std::string& content) const {
    const auto p = path_ / rel;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << content;
  }

  void write_all(const std::filesystem::path& base, const std::map<std::string, std::string>& files) const {
    for (const auto& [rel, content] : files) write((base / rel).string(), content);
  }

 private:
  std::filesystem::path path_;
};

}  // namespace depsentry::testing
