#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sigseg/signalgen.hpp"

namespace sigseg {

enum class StdMode {
  Population,  // divisor n
  Sample,      // divisor n - 1
};

struct ThresholdParams {
  double k = 2.0;
  StdMode stat_mode = StdMode::Population;
};

// Frames whose value exceeded the threshold; indices are 1-based.
struct FlagSet {
  std::vector<std::size_t> indices;
  double thresh = 0.0;
};

// Inclusive 1-based frame span; start_s is the start of the first frame and
// end_s the end of the last one.
struct CandidateInterval {
  std::string video_id;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
  double peak_value = 0.0;
  double start_s = 0.0;
  double end_s = 0.0;

  friend bool operator==(const CandidateInterval&, const CandidateInterval&) = default;
};

struct GroupingParams {
  double gap_tol_s = 0.5;
  double min_dur_s = 1.0;
};

double median_of(std::span<const double> values);
double std_of(std::span<const double> values, StdMode mode);

// median(V) + k * std(V)
double threshold_of(const ResidualSignal& signal, const ThresholdParams& params);

// Strict comparison: values equal to thresh are not flagged.
FlagSet flag_frames(const ResidualSignal& signal, double thresh);

// Merges flagged runs separated by at most gap_tol_s * fps unflagged frames
// and drops spans shorter than min_dur_s. When values is non-empty it is the
// signal the flags came from and peak_value is filled from it.
std::vector<CandidateInterval> group_segments(const FlagSet& flags, double fps,
                                              const GroupingParams& grouping,
                                              std::span<const double> values = {});

std::vector<CandidateInterval> detect(const ResidualSignal& signal, const ThresholdParams& params,
                                      const GroupingParams& grouping);

// header: video_id,start_frame,end_frame,start_s,end_s,peak_value
void write_candidates_csv(std::span<const CandidateInterval> intervals,
                          const std::filesystem::path& path);
std::vector<CandidateInterval> read_candidates_csv(const std::filesystem::path& path);

}  // namespace sigseg
