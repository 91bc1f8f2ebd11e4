#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "sigseg/frameio.hpp"

namespace sigseg {

// Per-pixel mean of a video: the driver's normal posture.
struct MeanFrame {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;
  std::uint64_t count = 0;

  friend bool operator==(const MeanFrame&, const MeanFrame&) = default;
};

// Running per-pixel sums. Sums of 8-bit values stay exact in a double for
// any realistic frame count, so accumulation order does not change results.
class MeanAccumulator {
 public:
  MeanAccumulator() = default;
  MeanAccumulator(std::size_t width, std::size_t height);

  void accumulate(const Frame& frame);
  void merge(const MeanAccumulator& other);
  MeanFrame finalize() const;

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::uint64_t count() const noexcept { return count_; }
  const std::vector<double>& sums() const noexcept { return sums_; }

  friend bool operator==(const MeanAccumulator&, const MeanAccumulator&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> sums_;
  std::uint64_t count_ = 0;
};

// Value-returning forms of the accumulator operations.
MeanAccumulator accumulate(MeanAccumulator acc, const Frame& frame);
MeanAccumulator merge(MeanAccumulator a, const MeanAccumulator& b);
MeanFrame finalize(const MeanAccumulator& acc);

MeanFrame estimate_mean(const FrameSequence& seq);

// SGBG container: magic, u32 version, u32 width, u32 height, f64 values (all LE).
void save_mean_frame(const MeanFrame& mean, const std::filesystem::path& path);
MeanFrame load_mean_frame(const std::filesystem::path& path);

}  // namespace sigseg
