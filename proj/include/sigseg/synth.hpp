#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sigseg/classifier.hpp"
#include "sigseg/evaluator.hpp"
#include "sigseg/frameio.hpp"

namespace sigseg {

enum class BasePattern { Constant, Gradient, Blob };

// Class-keyed overlays composited during an anomaly.
enum class Motif {
  Block,  // bright block in one cell of a 4x4 grid, cell = class_id % 16
  Bar,    // bright horizontal band, band = class_id % 8
};

struct InjectedAnomaly {
  int class_id = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  double amplitude = 50.0;
  Motif motif = Motif::Block;
};

struct SynthConfig {
  std::string video_id = "synth";
  std::size_t width = 64;
  std::size_t height = 64;
  double fps = 10.0;
  double duration_s = 60.0;
  double noise_std = 10.0;
  BasePattern base_pattern = BasePattern::Gradient;
  std::vector<InjectedAnomaly> anomalies;
  std::uint64_t seed = 0;
};

void validate(const SynthConfig& config);

struct SynthVideo {
  FrameSequence sequence;
  std::vector<ActivitySegment> ground_truth;
};

// Frame i shows time i / fps; an anomaly covers frames whose time lies in
// [start_s, end_s).
SynthVideo gen_sequence(const SynthConfig& config);

struct DatasetConfig {
  SynthConfig video;  // geometry, noise and seed; its anomaly list is ignored
  double anomaly_s = 3.0;
  double amplitude = 50.0;
  Motif motif = Motif::Block;
};

struct WindowDataset {
  std::vector<ClassWindow> train;
  std::vector<ClassWindow> test;
};

// per_class labeled windows per class, each cut from its own synthetic video
// and preprocessed exactly as classify_interval does. 80/20 seeded split.
WindowDataset gen_window_dataset(const DatasetConfig& config, int classes, int per_class,
                                 const ModelShape& shape, InputMode mode = InputMode::Residual);

struct SuiteConfig {
  SynthConfig base;  // per-video seed and id are derived from the suite seed
  std::size_t videos = 10;
  std::size_t anomalies_per_video = 1;
  int classes = 3;
  double anomaly_s = 3.0;
  double amplitude = 50.0;
  Motif motif = Motif::Block;
  std::string id_prefix = "video";
};

// Video configs with anomalies placed at seeded random times, one per equal
// slot of the timeline, with classes drawn uniformly.
std::vector<SynthConfig> random_suite(const SuiteConfig& suite, std::uint64_t seed);

// Writes <dir>/<video_id>/{manifest.json, frame_*.pgm}, <dir>/ground_truth.csv
// and the <dir>/dataset.json index listing every manifest.
void write_suite(std::span<const SynthVideo> videos, const std::filesystem::path& dir);

}  // namespace sigseg
