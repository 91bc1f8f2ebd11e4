#include <algorithm>
#include <cmath>

#include "sigseg/classifier.hpp"
#include "sigseg/error.hpp"

namespace sigseg {

Raster preprocess_frame(const Frame& frame, const MeanFrame& mean, const ModelShape& shape, InputMode mode) {
  if (mode == InputMode::Raw) return downsample(frame, shape.width, shape.height);
  if (frame.width != mean.width || frame.height != mean.height) {
    throw Error(ErrorCode::DimensionMismatch, "frame and mean frame differ in size");
  }
  std::vector<double> residual(frame.pixels.size());
  for (std::size_t j = 0; j < residual.size(); ++j) residual[j] = std::abs(frame.pixels[j] - mean.values[j]);
  Raster r = downsample(residual, frame.width, frame.height, shape.width, shape.height);
  for (auto& v : r.values) v /= 255.0;
  return r;
}

std::vector<std::size_t> window_starts(std::size_t length, std::size_t steps) {
  if (length == 0) throw Error(ErrorCode::EmptyInterval, "span has no frames");
  const std::size_t stride = std::max<std::size_t>(1, steps / 2);
  std::vector<std::size_t> starts{0};
  while (starts.back() + steps < length) starts.push_back(starts.back() + stride);
  return starts;
}

std::vector<ClassWindow> extract_windows(const FrameSequence& seq, const MeanFrame& mean, std::size_t first,
                                         std::size_t length, const ModelShape& shape, InputMode mode) {
  if (length == 0) throw Error(ErrorCode::EmptyInterval, "span has no frames");
  if (first + length > seq.size()) {
    throw Error(ErrorCode::ShapeMismatch, "span [" + std::to_string(first) + ", " +
                                              std::to_string(first + length) + ") exceeds video of " +
                                              std::to_string(seq.size()) + " frames");
  }
  // Windows overlap, so every frame in the span is preprocessed once up front.
  std::vector<Raster> rasters;
  rasters.reserve(length);
  for (std::size_t i = 0; i < length; ++i) rasters.push_back(preprocess_frame(seq.frame(first + i), mean, shape, mode));

  const std::size_t plane = shape.height * shape.width;
  std::vector<ClassWindow> windows;
  for (std::size_t start : window_starts(length, shape.steps)) {
    ClassWindow w{shape.steps, shape.height, shape.width, std::vector<double>(shape.steps * plane), std::nullopt};
    for (std::size_t t = 0; t < shape.steps; ++t) {
      const auto& src = rasters[std::min(start + t, length - 1)].values;
      std::copy(src.begin(), src.end(), w.values.begin() + static_cast<std::ptrdiff_t>(t * plane));
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

ActivitySegment classify_interval(const CnnLstmModel& model, const FrameSequence& seq, const MeanFrame& mean,
                                  const CandidateInterval& interval, InputMode mode) {
  if (interval.start_frame < 1 || interval.end_frame < interval.start_frame) {
    throw Error(ErrorCode::EmptyInterval, "interval [" + std::to_string(interval.start_frame) + ", " +
                                              std::to_string(interval.end_frame) + "] is empty");
  }
  const auto windows = extract_windows(seq, mean, interval.start_frame - 1,
                                       interval.end_frame - interval.start_frame + 1, model.shape, mode);
  std::vector<double> log_probs(model.shape.classes, 0.0);
  ForwardCache cache;
  for (const auto& w : windows) {
    forward(model, w, &cache);
    const double mx = *std::max_element(cache.logits.begin(), cache.logits.end());
    double z = 0.0;
    for (double l : cache.logits) z += std::exp(l - mx);
    const double log_z = mx + std::log(z);
    for (std::size_t k = 0; k < log_probs.size(); ++k) log_probs[k] += cache.logits[k] - log_z;
  }
  return {seq.video_id(), argmax_class(log_probs), interval.start_s, interval.end_s};
}

std::vector<ClassWindow> windows_from_segments(const FrameSequence& seq, const MeanFrame& mean,
                                               std::span<const ActivitySegment> segments,
                                               const ModelShape& shape, InputMode mode) {
  std::vector<ClassWindow> out;
  const auto n = static_cast<double>(seq.size());
  for (const auto& s : segments) {
    if (s.video_id != seq.video_id()) continue;
    if (s.class_id < 0 || static_cast<std::size_t>(s.class_id) >= shape.classes) {
      throw Error(ErrorCode::BadLabel, "segment class " + std::to_string(s.class_id) + " outside [0, " +
                                           std::to_string(shape.classes) + ")");
    }
    const double first = std::clamp(std::round(s.start_s * seq.fps()), 0.0, n);
    const double last = std::clamp(std::round(s.end_s * seq.fps()), 0.0, n);
    if (last <= first) continue;
    auto windows = extract_windows(seq, mean, static_cast<std::size_t>(first),
                                   static_cast<std::size_t>(last - first), shape, mode);
    for (auto& w : windows) {
      w.label = s.class_id;
      out.push_back(std::move(w));
    }
  }
  return out;
}

}  // namespace sigseg
