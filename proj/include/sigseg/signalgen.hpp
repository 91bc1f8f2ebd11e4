#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "sigseg/background.hpp"
#include "sigseg/frameio.hpp"

namespace sigseg {

// How per-pixel deviations are folded into one value per frame.
enum class ResidualMode {
  Absolute,  // sum of |X - mean|; default
  Signed,    // sum of (X - mean); deviations of opposite sign cancel
};

struct ResidualSignal {
  std::string video_id;
  double fps = 0.0;
  std::vector<double> values;  // V_1..V_n, stored 0-based
  std::size_t pixel_count = 0;

  std::size_t size() const noexcept { return values.size(); }
};

double residual_value(const Frame& frame, const MeanFrame& mean,
                      ResidualMode mode = ResidualMode::Absolute);

ResidualSignal generate_signal(const FrameSequence& seq, const MeanFrame& mean,
                               ResidualMode mode = ResidualMode::Absolute);

// Centered moving average, truncated at the edges so boundary samples
// average fewer neighbours. window = 1 is the identity.
ResidualSignal smooth(const ResidualSignal& signal, std::size_t window);

// CSV with header frame_index,time_s,value. frame_index is 0-based and
// time_s = frame_index / fps, i.e. the start time of that frame.
void write_signal_csv(const ResidualSignal& signal, const std::filesystem::path& path);

}  // namespace sigseg
