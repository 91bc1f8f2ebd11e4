#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigseg/background.hpp"
#include "sigseg/classifier.hpp"
#include "sigseg/detector.hpp"
#include "sigseg/error.hpp"
#include "sigseg/evaluator.hpp"
#include "sigseg/signalgen.hpp"

namespace sigseg {

struct DetectorConfig {
  ThresholdParams threshold;
  GroupingParams grouping;
  std::size_t smooth_window = 1;
  ResidualMode residual_mode = ResidualMode::Absolute;
};

struct PipelineConfig {
  std::vector<std::filesystem::path> manifests;
  // A .sgbg file (single manifest) or a directory of <video_id>.sgbg files.
  std::filesystem::path mean_frame;
  std::filesystem::path model;
  std::filesystem::path out_dir = ".";
  DetectorConfig detector;
  ModelShape model_shape;
  InputMode input_mode = InputMode::Residual;
  TrainConfig train;
  double tol_s = kDefaultMatchTolerance;
  std::uint64_t seed = 0;
};

// JSON keys mirror the struct: manifest, mean_frame, model, out_dir,
// detector{k, stat_mode, gap_tol_s, min_dur_s, smooth_window, residual_mode},
// classifier{steps, height, width, conv1_filters, conv2_filters, embed,
// hidden, classes, input_mode}, train{learning_rate, beta1, beta2, epsilon,
// batch_size, epochs, shuffle}, evaluator{tol_s}, seed. Unknown keys are
// rejected.
PipelineConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const PipelineConfig& config);
PipelineConfig load_config(const std::filesystem::path& path);

// Rethrows module errors with the stage name prepended to the detail.
template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), stage + ": " + e.detail());
  }
}

// Mean frame for seq: loaded from config.mean_frame when set, else estimated.
MeanFrame mean_for(const FrameSequence& seq, const std::filesystem::path& mean_frame, std::size_t video_count);

ResidualSignal signal_for(const FrameSequence& seq, const MeanFrame& mean, const DetectorConfig& config);

std::vector<CandidateInterval> detect_video(const FrameSequence& seq, const MeanFrame& mean,
                                            const DetectorConfig& config);

// Labeled windows from a directory written by write_suite (dataset.json index
// plus ground-truth CSV).
std::vector<ClassWindow> load_training_windows(const std::filesystem::path& dataset_dir, const ModelShape& shape,
                                               InputMode mode);

// Sorted by (video_id, start_s).
void sort_segments(std::vector<ActivitySegment>& segments);

struct PipelineOutput {
  std::vector<CandidateInterval> candidates;
  std::vector<ActivitySegment> submission;
  std::optional<EvalReport> report;
};

// estimate/load mean -> signal -> detect -> classify for each manifest, then
// scores against ground_truth when it is non-null.
PipelineOutput run_pipeline(const PipelineConfig& config, const CnnLstmModel& model,
                            const std::vector<ActivitySegment>* ground_truth = nullptr);

}  // namespace sigseg
