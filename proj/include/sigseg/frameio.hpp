#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sigseg {

// 8-bit grayscale raster, row-major.
struct Frame {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(std::size_t w, std::size_t h, std::vector<std::uint8_t> px);
  Frame(std::size_t w, std::size_t h, std::uint8_t fill = 0);

  std::size_t size() const noexcept { return pixels.size(); }
  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }

  friend bool operator==(const Frame&, const Frame&) = default;
};

// Real-valued raster used for classifier input.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  friend bool operator==(const Raster&, const Raster&) = default;
};

// Ordered frames of one video. Frames are either held in memory or loaded
// from disk on access; in the latter case only headers are read up front.
class FrameSequence {
 public:
  FrameSequence() = default;
  FrameSequence(std::string video_id, double fps, std::vector<Frame> frames);

  static FrameSequence from_files(std::string video_id, double fps,
                                  std::vector<std::filesystem::path> paths,
                                  std::size_t width, std::size_t height);

  const std::string& video_id() const noexcept { return video_id_; }
  double fps() const noexcept { return fps_; }
  std::size_t size() const noexcept;
  bool empty() const noexcept { return size() == 0; }
  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }

  // Frame at 0-based position i. Disk-backed sequences decode on every call.
  Frame frame(std::size_t i) const;

  const std::vector<std::filesystem::path>& paths() const noexcept { return paths_; }

 private:
  std::string video_id_;
  double fps_ = 0.0;
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<Frame> frames_;
  std::vector<std::filesystem::path> paths_;
};

struct PgmHeader {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t raster_offset = 0;
};

Frame load_frame(const std::filesystem::path& path);
PgmHeader read_pgm_header(const std::filesystem::path& path);
void write_frame(const Frame& frame, const std::filesystem::path& path);

FrameSequence load_sequence(const std::filesystem::path& manifest_path);

// Writes frames as frame_NNNNNN.pgm next to a manifest.json in dir and
// returns the manifest path.
std::filesystem::path write_sequence(const FrameSequence& seq, const std::filesystem::path& dir);

// Block-average pooling over a floor-split partition of the source raster.
Raster downsample(std::span<const double> values, std::size_t width, std::size_t height,
                  std::size_t out_w, std::size_t out_h);

// Same pooling on an 8-bit frame, scaled into [0,1].
Raster downsample(const Frame& frame, std::size_t out_w, std::size_t out_h);

}  // namespace sigseg
