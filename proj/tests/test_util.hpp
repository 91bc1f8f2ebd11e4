#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "sigseg/frameio.hpp"

namespace sigseg::testing {

inline Frame random_frame(std::size_t w, std::size_t h, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> px(0, 255);
  Frame f(w, h);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(px(rng));
  return f;
}

inline std::vector<Frame> random_frames(std::size_t n, std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Frame> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_frame(w, h, rng));
  return out;
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sigseg_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
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

}  // namespace sigseg::testing
