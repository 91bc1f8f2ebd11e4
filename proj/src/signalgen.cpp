#include "sigseg/signalgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "sigseg/error.hpp"

namespace sigseg {

double residual_value(const Frame& frame, const MeanFrame& mean, ResidualMode mode) {
  if (frame.width != mean.width || frame.height != mean.height) {
    throw Error(ErrorCode::DimensionMismatch, "frame and mean frame differ in size");
  }
  double sum = 0.0;
  const std::size_t n = frame.pixels.size();
  if (mode == ResidualMode::Absolute) {
    for (std::size_t j = 0; j < n; ++j) sum += std::abs(frame.pixels[j] - mean.values[j]);
  } else {
    for (std::size_t j = 0; j < n; ++j) sum += frame.pixels[j] - mean.values[j];
  }
  return sum;
}

ResidualSignal generate_signal(const FrameSequence& seq, const MeanFrame& mean, ResidualMode mode) {
  if (seq.empty()) throw Error(ErrorCode::EmptySequence, "video '" + seq.video_id() + "' has no frames");
  if (seq.width() != mean.width || seq.height() != mean.height) {
    throw Error(ErrorCode::DimensionMismatch, "sequence and mean frame differ in size");
  }
  ResidualSignal out{seq.video_id(), seq.fps(), {}, mean.width * mean.height};
  out.values.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) out.values.push_back(residual_value(seq.frame(i), mean, mode));
  return out;
}

ResidualSignal smooth(const ResidualSignal& signal, std::size_t window) {
  const std::size_t n = signal.values.size();
  if (window % 2 == 0 || window < 1 || window > n) {
    throw Error(ErrorCode::BadWindow, "window must be odd and in [1, " + std::to_string(n) + "]");
  }
  ResidualSignal out = signal;
  if (window == 1) return out;

  const std::size_t half = window / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    double sum = 0.0, mn = signal.values[lo], mx = signal.values[lo];
    for (std::size_t j = lo; j < hi; ++j) {
      sum += signal.values[j];
      mn = std::min(mn, signal.values[j]);
      mx = std::max(mx, signal.values[j]);
    }
    // Division rounding can land one ulp outside the local range.
    out.values[i] = std::clamp(sum / static_cast<double>(hi - lo), mn, mx);
  }
  return out;
}

void write_signal_csv(const ResidualSignal& signal, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  out << "frame_index,time_s,value\n";
  char line[96];
  for (std::size_t i = 0; i < signal.values.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.6f,%.17g\n", i, static_cast<double>(i) / signal.fps,
                  signal.values[i]);
    out << line;
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

}  // namespace sigseg
