#include "sigseg/background.hpp"

#include <fstream>

#include "binio.hpp"
#include "sigseg/error.hpp"

namespace sigseg {

namespace {
constexpr std::uint32_t kMeanFrameVersion = 1;
}

MeanAccumulator::MeanAccumulator(std::size_t width, std::size_t height)
    : width_(width), height_(height), sums_(width * height, 0.0) {}

void MeanAccumulator::accumulate(const Frame& frame) {
  if (count_ == 0 && sums_.empty()) {
    // Default-constructed accumulator adopts the first frame's shape.
    width_ = frame.width;
    height_ = frame.height;
    sums_.assign(width_ * height_, 0.0);
  }
  if (frame.width != width_ || frame.height != height_) {
    throw Error(ErrorCode::DimensionMismatch, "frame does not match accumulator dimensions");
  }
  for (std::size_t j = 0; j < sums_.size(); ++j) sums_[j] += frame.pixels[j];
  ++count_;
}

void MeanAccumulator::merge(const MeanAccumulator& other) {
  if (other.sums_.empty() && other.count_ == 0) return;
  if (sums_.empty() && count_ == 0) {
    *this = other;
    return;
  }
  if (other.width_ != width_ || other.height_ != height_) {
    throw Error(ErrorCode::DimensionMismatch, "accumulators differ in dimensions");
  }
  for (std::size_t j = 0; j < sums_.size(); ++j) sums_[j] += other.sums_[j];
  count_ += other.count_;
}

MeanFrame MeanAccumulator::finalize() const {
  if (count_ == 0) throw Error(ErrorCode::EmptySequence, "no frames accumulated");
  MeanFrame out{width_, height_, std::vector<double>(sums_.size()), count_};
  const auto n = static_cast<double>(count_);
  for (std::size_t j = 0; j < sums_.size(); ++j) out.values[j] = sums_[j] / n;
  return out;
}

MeanAccumulator accumulate(MeanAccumulator acc, const Frame& frame) {
  acc.accumulate(frame);
  return acc;
}

MeanAccumulator merge(MeanAccumulator a, const MeanAccumulator& b) {
  a.merge(b);
  return a;
}

MeanFrame finalize(const MeanAccumulator& acc) { return acc.finalize(); }

MeanFrame estimate_mean(const FrameSequence& seq) {
  if (seq.empty()) throw Error(ErrorCode::EmptySequence, "video '" + seq.video_id() + "' has no frames");
  MeanAccumulator acc(seq.width(), seq.height());
  for (std::size_t i = 0; i < seq.size(); ++i) acc.accumulate(seq.frame(i));
  return acc.finalize();
}

void save_mean_frame(const MeanFrame& mean, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  out.write("SGBG", 4);
  binio::put_u32(out, kMeanFrameVersion);
  binio::put_u32(out, static_cast<std::uint32_t>(mean.width));
  binio::put_u32(out, static_cast<std::uint32_t>(mean.height));
  for (double v : mean.values) binio::put_f64(out, v);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

MeanFrame load_mean_frame(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  binio::expect_magic(in, "SGBG");
  const auto version = binio::get_u32(in);
  if (version != kMeanFrameVersion) {
    throw Error(ErrorCode::MalformedFile, "unsupported SGBG version " + std::to_string(version));
  }
  MeanFrame mean;
  mean.width = binio::get_u32(in);
  mean.height = binio::get_u32(in);
  if (mean.width == 0 || mean.height == 0) throw Error(ErrorCode::MalformedFile, "zero dimension");
  mean.values.resize(mean.width * mean.height);
  for (auto& v : mean.values) v = binio::get_f64(in);
  // The container does not record n; a loaded mean is treated as finalized.
  mean.count = 1;
  return mean;
}

}  // namespace sigseg
