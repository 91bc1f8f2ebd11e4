#include "sigseg/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

#include "sigseg/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sigseg {

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::BadConfig, where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) throw Error(ErrorCode::BadConfig, "unknown key '" + k + "' in " + where);
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename Enum>
Enum parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, Enum>> table, const char* key) {
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  throw Error(ErrorCode::BadConfig, std::string("bad value for '") + key + "': " + s);
}

}  // namespace

PipelineConfig config_from_json(const json& doc) {
  reject_unknown(doc, {"manifest", "mean_frame", "model", "out_dir", "detector", "classifier", "train", "evaluator", "seed"},
                 "config");
  PipelineConfig c;
  if (doc.contains("manifest")) {
    const auto& m = doc["manifest"];
    if (m.is_string()) {
      c.manifests = {m.get<std::string>()};
    } else if (m.is_array()) {
      for (const auto& e : m) {
        if (!e.is_string()) throw Error(ErrorCode::BadConfig, "manifest entries must be strings");
        c.manifests.emplace_back(e.get<std::string>());
      }
    } else {
      throw Error(ErrorCode::BadConfig, "manifest must be a string or an array of strings");
    }
  }
  std::string path;
  if (doc.contains("mean_frame")) read_opt(doc, "mean_frame", path), c.mean_frame = path;
  if (doc.contains("model")) read_opt(doc, "model", path), c.model = path;
  if (doc.contains("out_dir")) read_opt(doc, "out_dir", path), c.out_dir = path;
  read_opt(doc, "seed", c.seed);

  if (doc.contains("detector")) {
    const auto& d = doc["detector"];
    reject_unknown(d, {"k", "stat_mode", "gap_tol_s", "min_dur_s", "smooth_window", "residual_mode"}, "detector");
    read_opt(d, "k", c.detector.threshold.k);
    read_opt(d, "gap_tol_s", c.detector.grouping.gap_tol_s);
    read_opt(d, "min_dur_s", c.detector.grouping.min_dur_s);
    read_opt(d, "smooth_window", c.detector.smooth_window);
    std::string s;
    if (d.contains("stat_mode")) {
      read_opt(d, "stat_mode", s);
      c.detector.threshold.stat_mode =
          parse_enum<StdMode>(s, {{"population", StdMode::Population}, {"sample", StdMode::Sample}}, "stat_mode");
    }
    if (d.contains("residual_mode")) {
      read_opt(d, "residual_mode", s);
      c.detector.residual_mode = parse_enum<ResidualMode>(
          s, {{"absolute", ResidualMode::Absolute}, {"signed", ResidualMode::Signed}}, "residual_mode");
    }
  }
  if (doc.contains("classifier")) {
    const auto& m = doc["classifier"];
    reject_unknown(m, {"steps", "height", "width", "conv1_filters", "conv2_filters", "embed", "hidden", "classes",
                       "input_mode"},
                   "classifier");
    auto& s = c.model_shape;
    read_opt(m, "steps", s.steps);
    read_opt(m, "height", s.height);
    read_opt(m, "width", s.width);
    read_opt(m, "conv1_filters", s.conv1_filters);
    read_opt(m, "conv2_filters", s.conv2_filters);
    read_opt(m, "embed", s.embed);
    read_opt(m, "hidden", s.hidden);
    read_opt(m, "classes", s.classes);
    if (m.contains("input_mode")) {
      std::string mode;
      read_opt(m, "input_mode", mode);
      c.input_mode = parse_enum<InputMode>(mode, {{"residual", InputMode::Residual}, {"raw", InputMode::Raw}}, "input_mode");
    }
  }
  if (doc.contains("train")) {
    const auto& t = doc["train"];
    reject_unknown(t, {"learning_rate", "beta1", "beta2", "epsilon", "batch_size", "epochs", "shuffle"}, "train");
    read_opt(t, "learning_rate", c.train.learning_rate);
    read_opt(t, "beta1", c.train.beta1);
    read_opt(t, "beta2", c.train.beta2);
    read_opt(t, "epsilon", c.train.epsilon);
    read_opt(t, "batch_size", c.train.batch_size);
    read_opt(t, "epochs", c.train.epochs);
    read_opt(t, "shuffle", c.train.shuffle);
  }
  if (doc.contains("evaluator")) {
    reject_unknown(doc["evaluator"], {"tol_s"}, "evaluator");
    read_opt(doc["evaluator"], "tol_s", c.tol_s);
  }
  c.train.seed = c.seed;
  validate(c.model_shape);
  validate(c.train);
  if (!(c.detector.threshold.k >= 0.0) || !(c.detector.grouping.gap_tol_s >= 0.0) ||
      !(c.detector.grouping.min_dur_s >= 0.0) || c.detector.smooth_window % 2 == 0 || !(c.tol_s >= 0.0)) {
    throw Error(ErrorCode::BadConfig, "detector/evaluator parameters out of range");
  }
  return c;
}

json config_to_json(const PipelineConfig& c) {
  json manifests = json::array();
  for (const auto& m : c.manifests) manifests.push_back(m.string());
  const auto& s = c.model_shape;
  return {
      {"manifest", manifests},
      {"mean_frame", c.mean_frame.string()},
      {"model", c.model.string()},
      {"out_dir", c.out_dir.string()},
      {"detector",
       {{"k", c.detector.threshold.k},
        {"stat_mode", c.detector.threshold.stat_mode == StdMode::Population ? "population" : "sample"},
        {"gap_tol_s", c.detector.grouping.gap_tol_s},
        {"min_dur_s", c.detector.grouping.min_dur_s},
        {"smooth_window", c.detector.smooth_window},
        {"residual_mode", c.detector.residual_mode == ResidualMode::Absolute ? "absolute" : "signed"}}},
      {"classifier",
       {{"steps", s.steps},
        {"height", s.height},
        {"width", s.width},
        {"conv1_filters", s.conv1_filters},
        {"conv2_filters", s.conv2_filters},
        {"embed", s.embed},
        {"hidden", s.hidden},
        {"classes", s.classes},
        {"input_mode", c.input_mode == InputMode::Residual ? "residual" : "raw"}}},
      {"train",
       {{"learning_rate", c.train.learning_rate},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"epsilon", c.train.epsilon},
        {"batch_size", c.train.batch_size},
        {"epochs", c.train.epochs},
        {"shuffle", c.train.shuffle}}},
      {"evaluator", {{"tol_s", c.tol_s}}},
      {"seed", c.seed},
  };
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadConfig, path.string() + ": " + e.what());
  }
}

MeanFrame mean_for(const FrameSequence& seq, const fs::path& mean_frame, std::size_t video_count) {
  if (mean_frame.empty()) return estimate_mean(seq);
  if (fs::is_directory(mean_frame)) return load_mean_frame(mean_frame / (seq.video_id() + ".sgbg"));
  if (video_count != 1) {
    throw Error(ErrorCode::BadConfig, "a single mean-frame file needs exactly one manifest; pass a directory instead");
  }
  return load_mean_frame(mean_frame);
}

ResidualSignal signal_for(const FrameSequence& seq, const MeanFrame& mean, const DetectorConfig& config) {
  auto signal = generate_signal(seq, mean, config.residual_mode);
  if (config.smooth_window != 1) signal = smooth(signal, config.smooth_window);
  return signal;
}

std::vector<CandidateInterval> detect_video(const FrameSequence& seq, const MeanFrame& mean,
                                            const DetectorConfig& config) {
  return detect(signal_for(seq, mean, config), config.threshold, config.grouping);
}

std::vector<ClassWindow> load_training_windows(const fs::path& dataset_dir, const ModelShape& shape, InputMode mode) {
  const fs::path index = dataset_dir / "dataset.json";
  std::ifstream in(index);
  if (!in) throw Error(ErrorCode::MissingFile, index.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedFile, index.string() + ": " + e.what());
  }
  if (!doc.contains("manifests") || !doc["manifests"].is_array() || !doc.contains("ground_truth") ||
      !doc["ground_truth"].is_string()) {
    throw Error(ErrorCode::MalformedFile, index.string() + ": expected {manifests, ground_truth}");
  }
  const auto gt = read_segments_csv(dataset_dir / doc["ground_truth"].get<std::string>());
  std::vector<ClassWindow> windows;
  for (const auto& m : doc["manifests"]) {
    const auto seq = load_sequence(dataset_dir / m.get<std::string>());
    const auto mean = estimate_mean(seq);
    auto w = windows_from_segments(seq, mean, gt, shape, mode);
    std::move(w.begin(), w.end(), std::back_inserter(windows));
  }
  if (windows.empty()) throw Error(ErrorCode::EmptyDataset, "no labeled windows in " + dataset_dir.string());
  return windows;
}

void sort_segments(std::vector<ActivitySegment>& segments) {
  std::stable_sort(segments.begin(), segments.end(), [](const auto& a, const auto& b) {
    return std::tie(a.video_id, a.start_s) < std::tie(b.video_id, b.start_s);
  });
}

PipelineOutput run_pipeline(const PipelineConfig& config, const CnnLstmModel& model,
                            const std::vector<ActivitySegment>* ground_truth) {
  if (config.manifests.empty()) throw Error(ErrorCode::BadConfig, "no manifests given");
  PipelineOutput out;
  for (const auto& manifest : config.manifests) {
    const auto seq = run_stage("load", [&] { return load_sequence(manifest); });
    const auto mean = run_stage("estimate-bg", [&] { return mean_for(seq, config.mean_frame, config.manifests.size()); });
    const auto candidates = run_stage("detect", [&] { return detect_video(seq, mean, config.detector); });
    run_stage("classify", [&] {
      for (const auto& c : candidates) out.submission.push_back(classify_interval(model, seq, mean, c, config.input_mode));
      return 0;
    });
    out.candidates.insert(out.candidates.end(), candidates.begin(), candidates.end());
  }
  sort_segments(out.submission);
  if (ground_truth != nullptr) {
    out.report = run_stage("evaluate", [&] { return average_score(*ground_truth, out.submission, config.tol_s); });
  }
  return out;
}

}  // namespace sigseg
