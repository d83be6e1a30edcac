#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#ifndef FACTALIGN_FIXTURES_DIR
#error "FACTALIGN_FIXTURES_DIR must be defined"
#endif

namespace fixtures {

inline std::filesystem::path dir() { return FACTALIGN_FIXTURES_DIR; }
inline std::filesystem::path path(const std::string& name) { return dir() / name; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("factalign_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Sets FIXTURES for ${FIXTURES} references in the shipped config.
inline void export_fixtures_env() { ::setenv("FIXTURES", dir().c_str(), 1); }

}  // namespace fixtures
