#include "sigseg/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "sigseg/csv.hpp"
#include "sigseg/error.hpp"

namespace sigseg {

namespace {
// Absorbs representation error in products like 0.5 s * 10 fps.
constexpr double kTimeSlack = 1e-9;
}  // namespace

double median_of(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptySignal, "median of empty series");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

double std_of(std::span<const double> values, StdMode mode) {
  const std::size_t n = values.size();
  if (n == 0) throw Error(ErrorCode::EmptySignal, "std of empty series");
  if (mode == StdMode::Sample && n < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double divisor = mode == StdMode::Population ? static_cast<double>(n) : static_cast<double>(n - 1);
  return std::sqrt(ss / divisor);
}

double threshold_of(const ResidualSignal& signal, const ThresholdParams& params) {
  if (signal.values.empty()) throw Error(ErrorCode::EmptySignal, "signal '" + signal.video_id + "' is empty");
  if (!(params.k >= 0.0)) throw Error(ErrorCode::BadConfig, "k must be non-negative");
  return median_of(signal.values) + params.k * std_of(signal.values, params.stat_mode);
}

FlagSet flag_frames(const ResidualSignal& signal, double thresh) {
  FlagSet flags{{}, thresh};
  for (std::size_t i = 0; i < signal.values.size(); ++i) {
    if (signal.values[i] > thresh) flags.indices.push_back(i + 1);
  }
  return flags;
}

std::vector<CandidateInterval> group_segments(const FlagSet& flags, double fps,
                                              const GroupingParams& grouping,
                                              std::span<const double> values) {
  if (!(fps > 0.0)) throw Error(ErrorCode::BadConfig, "fps must be positive");
  if (!(grouping.gap_tol_s >= 0.0) || !(grouping.min_dur_s >= 0.0)) {
    throw Error(ErrorCode::BadConfig, "gap_tol_s and min_dur_s must be non-negative");
  }
  const double gap_frames = grouping.gap_tol_s * fps;
  std::vector<CandidateInterval> out;
  auto emit = [&](std::size_t first, std::size_t last) {
    const double duration = static_cast<double>(last - first + 1) / fps;
    if (duration + kTimeSlack < grouping.min_dur_s) return;
    CandidateInterval c;
    c.start_frame = first;
    c.end_frame = last;
    c.start_s = static_cast<double>(first - 1) / fps;
    c.end_s = static_cast<double>(last) / fps;
    if (!values.empty()) {
      c.peak_value = *std::max_element(values.begin() + static_cast<std::ptrdiff_t>(first - 1),
                                       values.begin() + static_cast<std::ptrdiff_t>(last));
    }
    out.push_back(c);
  };

  const auto& idx = flags.indices;
  if (idx.empty()) return out;
  std::size_t first = idx.front(), last = idx.front();
  for (std::size_t k = 1; k < idx.size(); ++k) {
    const std::size_t gap = idx[k] - last - 1;
    if (static_cast<double>(gap) <= gap_frames + kTimeSlack) {
      last = idx[k];
    } else {
      emit(first, last);
      first = last = idx[k];
    }
  }
  emit(first, last);
  return out;
}

std::vector<CandidateInterval> detect(const ResidualSignal& signal, const ThresholdParams& params,
                                      const GroupingParams& grouping) {
  const double thresh = threshold_of(signal, params);
  auto intervals = group_segments(flag_frames(signal, thresh), signal.fps, grouping, signal.values);
  for (auto& c : intervals) c.video_id = signal.video_id;
  return intervals;
}

void write_candidates_csv(std::span<const CandidateInterval> intervals,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  out << "video_id,start_frame,end_frame,start_s,end_s,peak_value\n";
  char line[160];
  for (const auto& c : intervals) {
    std::snprintf(line, sizeof line, ",%zu,%zu,%.6f,%.6f,%.17g\n", c.start_frame, c.end_frame,
                  c.start_s, c.end_s, c.peak_value);
    out << c.video_id << line;
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

std::vector<CandidateInterval> read_candidates_csv(const std::filesystem::path& path) {
  const auto table = csv::read(path, "video_id,start_frame,end_frame,start_s,end_s,peak_value");
  std::vector<CandidateInterval> out;
  for (const auto& r : table.rows) {
    CandidateInterval c;
    c.video_id = r[0];
    const auto first = csv::to_int(r[1]), last = csv::to_int(r[2]);
    if (first < 1 || last < first) throw Error(ErrorCode::MalformedFile, "bad frame span in " + path.string());
    c.start_frame = static_cast<std::size_t>(first);
    c.end_frame = static_cast<std::size_t>(last);
    c.start_s = csv::to_double(r[3]);
    c.end_s = csv::to_double(r[4]);
    c.peak_value = csv::to_double(r[5]);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace sigseg
