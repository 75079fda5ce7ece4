#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

namespace testsupport {

/// Unique scratch directory, removed on destruction.
class TmpDir {
 public:
  explicit TmpDir(const std::string& hint) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("codedcache-" + hint + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TmpDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport
