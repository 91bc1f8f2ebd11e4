// sigseg: command-line front end for the posture-residual segmentation pipeline.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sigseg/background.hpp"
#include "sigseg/classifier.hpp"
#include "sigseg/detector.hpp"
#include "sigseg/error.hpp"
#include "sigseg/evaluator.hpp"
#include "sigseg/pipeline.hpp"
#include "sigseg/signalgen.hpp"
#include "sigseg/synth.hpp"

namespace fs = std::filesystem;
using namespace sigseg;

namespace {

struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> manifests;
  std::optional<std::string> bg;
};

struct DetectorFlags {
  std::optional<double> k, gap_tol, min_dur;
  std::optional<std::size_t> smooth;
  std::optional<std::string> residual_mode, std_mode;
};

void add_common(CLI::App* app, CommonFlags& f, bool with_inputs) {
  app->add_option("--config", f.config, "Pipeline config JSON");
  app->add_option("--seed", f.seed, "Seed for every random stream");
  app->add_option("--out", f.out, "Output directory");
  if (with_inputs) {
    app->add_option("--manifest", f.manifests, "Frame manifest JSON (repeatable)");
    app->add_option("--bg", f.bg, "Mean-frame file, or directory of <video_id>.sgbg");
  }
}

void add_detector(CLI::App* app, DetectorFlags& d) {
  app->add_option("--k", d.k, "Threshold multiplier on the std");
  app->add_option("--gap-tol", d.gap_tol, "Largest unflagged gap merged into one interval (s)");
  app->add_option("--min-dur", d.min_dur, "Shortest interval kept (s)");
  app->add_option("--smooth", d.smooth, "Odd moving-average window (frames)");
  app->add_option("--residual-mode", d.residual_mode, "absolute | signed")->check(CLI::IsMember({"absolute", "signed"}));
  app->add_option("--std-mode", d.std_mode, "population | sample")->check(CLI::IsMember({"population", "sample"}));
}

PipelineConfig resolve(const CommonFlags& f, const DetectorFlags* d = nullptr) {
  PipelineConfig c = f.config ? load_config(*f.config) : PipelineConfig{};
  if (!f.manifests.empty()) c.manifests.assign(f.manifests.begin(), f.manifests.end());
  if (f.bg) c.mean_frame = *f.bg;
  if (f.out) c.out_dir = *f.out;
  if (f.seed) c.seed = *f.seed;
  c.train.seed = c.seed;
  if (d != nullptr) {
    auto& det = c.detector;
    if (d->k) det.threshold.k = *d->k;
    if (d->gap_tol) det.grouping.gap_tol_s = *d->gap_tol;
    if (d->min_dur) det.grouping.min_dur_s = *d->min_dur;
    if (d->smooth) det.smooth_window = *d->smooth;
    if (d->residual_mode) det.residual_mode = *d->residual_mode == "signed" ? ResidualMode::Signed : ResidualMode::Absolute;
    if (d->std_mode) det.threshold.stat_mode = *d->std_mode == "sample" ? StdMode::Sample : StdMode::Population;
    if (!(det.threshold.k >= 0.0) || !(det.grouping.gap_tol_s >= 0.0) || !(det.grouping.min_dur_s >= 0.0)) {
      throw Error(ErrorCode::BadConfig, "--k, --gap-tol and --min-dur must be non-negative");
    }
  }
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + c.out_dir.string());
  return c;
}

void require_manifests(const PipelineConfig& c) {
  if (c.manifests.empty()) throw Error(ErrorCode::BadConfig, "at least one --manifest is required");
}

int cmd_estimate_bg(const CommonFlags& f) {
  const auto c = resolve(f);
  require_manifests(c);
  for (const auto& m : c.manifests) {
    const auto seq = run_stage("load", [&] { return load_sequence(m); });
    const auto mean = run_stage("estimate-bg", [&] { return estimate_mean(seq); });
    save_mean_frame(mean, c.out_dir / (seq.video_id() + ".sgbg"));
  }
  return 0;
}

int cmd_signal(const CommonFlags& f, const DetectorFlags& d) {
  const auto c = resolve(f, &d);
  require_manifests(c);
  for (const auto& m : c.manifests) {
    const auto seq = run_stage("load", [&] { return load_sequence(m); });
    const auto mean = run_stage("estimate-bg", [&] { return mean_for(seq, c.mean_frame, c.manifests.size()); });
    const auto signal = run_stage("signal", [&] { return signal_for(seq, mean, c.detector); });
    write_signal_csv(signal, c.out_dir / (seq.video_id() + ".signal.csv"));
  }
  return 0;
}

int cmd_detect(const CommonFlags& f, const DetectorFlags& d, bool emit_signal) {
  const auto c = resolve(f, &d);
  require_manifests(c);
  std::vector<CandidateInterval> all;
  for (const auto& m : c.manifests) {
    const auto seq = run_stage("load", [&] { return load_sequence(m); });
    const auto mean = run_stage("estimate-bg", [&] { return mean_for(seq, c.mean_frame, c.manifests.size()); });
    const auto signal = run_stage("signal", [&] { return signal_for(seq, mean, c.detector); });
    if (emit_signal) write_signal_csv(signal, c.out_dir / (seq.video_id() + ".signal.csv"));
    const auto found = run_stage("detect", [&] { return detect(signal, c.detector.threshold, c.detector.grouping); });
    all.insert(all.end(), found.begin(), found.end());
  }
  write_candidates_csv(all, c.out_dir / "candidates.csv");
  return 0;
}

struct TrainFlags {
  std::string data;
  std::optional<std::size_t> epochs, batch_size, classes;
  std::optional<double> learning_rate;
};

int cmd_train(const CommonFlags& f, const TrainFlags& t) {
  auto c = resolve(f);
  if (t.epochs) c.train.epochs = *t.epochs;
  if (t.batch_size) c.train.batch_size = *t.batch_size;
  if (t.learning_rate) c.train.learning_rate = *t.learning_rate;
  if (t.classes) c.model_shape.classes = *t.classes;
  if (!fs::is_directory(t.data)) throw Error(ErrorCode::MissingFile, "dataset directory " + t.data);
  const auto windows =
      run_stage("load", [&] { return load_training_windows(t.data, c.model_shape, c.input_mode); });
  auto result = run_stage("train", [&] { return train(init_model(c.model_shape, c.seed), windows, c.train); });
  save_model(result.model, c.out_dir / "model.sgsm");
  write_history_csv(result.history, c.out_dir / "history.csv");
  if (!result.history.empty()) {
    std::fprintf(stderr, "trained on %zu windows: final loss %.6f, accuracy %.4f\n", windows.size(),
                 result.history.back().loss, result.history.back().accuracy);
  }
  return 0;
}

int cmd_classify(const CommonFlags& f, const std::string& model_path, const std::string& candidates_path) {
  const auto c = resolve(f);
  require_manifests(c);
  const auto model = run_stage("load", [&] { return load_model(model_path); });
  const auto candidates = run_stage("load", [&] { return read_candidates_csv(candidates_path); });
  std::vector<ActivitySegment> submission;
  for (const auto& m : c.manifests) {
    const auto seq = run_stage("load", [&] { return load_sequence(m); });
    const auto mean = run_stage("estimate-bg", [&] { return mean_for(seq, c.mean_frame, c.manifests.size()); });
    run_stage("classify", [&] {
      for (const auto& cand : candidates) {
        if (cand.video_id == seq.video_id()) submission.push_back(classify_interval(model, seq, mean, cand, c.input_mode));
      }
      return 0;
    });
  }
  sort_segments(submission);
  write_segments_csv(submission, c.out_dir / "submission.csv");
  return 0;
}

int cmd_evaluate(const CommonFlags& f, const std::string& gt_path, const std::string& pred_path,
                 std::optional<double> tol) {
  auto c = resolve(f);
  if (tol) c.tol_s = *tol;
  const auto gt = run_stage("load", [&] { return read_segments_csv(gt_path); });
  const auto pred = run_stage("load", [&] { return read_segments_csv(pred_path); });
  const auto report = run_stage("evaluate", [&] { return average_score(gt, pred, c.tol_s); });
  write_report_json(report, c.out_dir / "report.json");
  std::fprintf(stderr, "average activity overlap score: %.4f\n", report.average_score);
  return 0;
}

int cmd_pipeline(const CommonFlags& f, const DetectorFlags& d, const std::optional<std::string>& model_path,
                 const std::optional<std::string>& gt_path) {
  auto c = resolve(f, &d);
  if (model_path) c.model = *model_path;
  if (c.model.empty()) throw Error(ErrorCode::BadConfig, "--model is required");
  require_manifests(c);
  const auto model = run_stage("load", [&] { return load_model(c.model); });
  std::optional<std::vector<ActivitySegment>> gt;
  if (gt_path) gt = run_stage("load", [&] { return read_segments_csv(*gt_path); });
  const auto out = run_pipeline(c, model, gt ? &*gt : nullptr);
  write_candidates_csv(out.candidates, c.out_dir / "candidates.csv");
  write_segments_csv(out.submission, c.out_dir / "submission.csv");
  if (out.report) {
    write_report_json(*out.report, c.out_dir / "report.json");
    std::fprintf(stderr, "average activity overlap score: %.4f\n", out.report->average_score);
  }
  return 0;
}

struct SynthFlags {
  std::size_t videos = 10;
  std::size_t anomalies_per_video = 1;
  int classes = 3;
  double duration_s = 60, fps = 10, noise = 10, amplitude = 50, anomaly_s = 3;
  std::size_t width = 64, height = 64;
  std::string motif = "block", pattern = "gradient", prefix = "video";
};

int cmd_synth(const CommonFlags& f, const SynthFlags& s) {
  const auto c = resolve(f);
  SuiteConfig suite;
  suite.videos = s.videos;
  suite.anomalies_per_video = s.anomalies_per_video;
  suite.classes = s.classes;
  suite.anomaly_s = s.anomaly_s;
  suite.amplitude = s.amplitude;
  suite.motif = s.motif == "bar" ? Motif::Bar : Motif::Block;
  suite.id_prefix = s.prefix;
  suite.base.width = s.width;
  suite.base.height = s.height;
  suite.base.fps = s.fps;
  suite.base.duration_s = s.duration_s;
  suite.base.noise_std = s.noise;
  suite.base.base_pattern = s.pattern == "constant" ? BasePattern::Constant
                            : s.pattern == "blob"   ? BasePattern::Blob
                                                    : BasePattern::Gradient;
  std::vector<SynthVideo> videos;
  run_stage("synth", [&] {
    for (const auto& cfg : random_suite(suite, c.seed)) videos.push_back(gen_sequence(cfg));
    return 0;
  });
  write_suite(videos, c.out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posture-residual activity segmentation for in-cabin driver video"};
  app.require_subcommand(1);

  CommonFlags bg_f;
  auto* bg = app.add_subcommand("estimate-bg", "Write the per-video mean frame (<video_id>.sgbg)");
  add_common(bg, bg_f, true);

  CommonFlags sig_f;
  DetectorFlags sig_d;
  auto* sig = app.add_subcommand("signal", "Write the per-frame residual signal CSV");
  add_common(sig, sig_f, true);
  add_detector(sig, sig_d);

  CommonFlags det_f;
  DetectorFlags det_d;
  bool emit_signal = false;
  auto* det = app.add_subcommand("detect", "Threshold residual spikes into candidates.csv");
  add_common(det, det_f, true);
  add_detector(det, det_d);
  det->add_flag("--emit-signal", emit_signal, "Also write <video_id>.signal.csv");

  CommonFlags tr_f;
  TrainFlags tr_t;
  auto* tr = app.add_subcommand("train", "Train the CNN-LSTM on a labeled dataset directory");
  add_common(tr, tr_f, false);
  tr->add_option("--data", tr_t.data, "Directory with dataset.json")->required();
  tr->add_option("--epochs", tr_t.epochs);
  tr->add_option("--batch-size", tr_t.batch_size);
  tr->add_option("--lr", tr_t.learning_rate);
  tr->add_option("--classes", tr_t.classes);

  CommonFlags cl_f;
  std::string cl_model, cl_candidates;
  auto* cl = app.add_subcommand("classify", "Classify candidate intervals into submission.csv");
  add_common(cl, cl_f, true);
  cl->add_option("--model", cl_model)->required();
  cl->add_option("--candidates", cl_candidates)->required();

  CommonFlags ev_f;
  std::string ev_gt, ev_pred;
  std::optional<double> ev_tol;
  auto* ev = app.add_subcommand("evaluate", "Score predictions against ground truth into report.json");
  add_common(ev, ev_f, false);
  ev->add_option("--gt", ev_gt)->required();
  ev->add_option("--pred", ev_pred)->required();
  ev->add_option("--tol", ev_tol, "Endpoint matching tolerance (s)");

  CommonFlags pl_f;
  DetectorFlags pl_d;
  std::optional<std::string> pl_model, pl_gt;
  auto* pl = app.add_subcommand("pipeline", "Run background, detection and classification end to end");
  add_common(pl, pl_f, true);
  add_detector(pl, pl_d);
  pl->add_option("--model", pl_model);
  pl->add_option("--gt", pl_gt, "Ground-truth CSV; writes report.json");

  CommonFlags sy_f;
  SynthFlags sy;
  auto* syn = app.add_subcommand("synth", "Generate a synthetic labeled video suite");
  add_common(syn, sy_f, false);
  syn->add_option("--videos", sy.videos);
  syn->add_option("--anomalies-per-video", sy.anomalies_per_video);
  syn->add_option("--classes", sy.classes);
  syn->add_option("--duration", sy.duration_s);
  syn->add_option("--fps", sy.fps);
  syn->add_option("--width", sy.width);
  syn->add_option("--height", sy.height);
  syn->add_option("--noise", sy.noise);
  syn->add_option("--amplitude", sy.amplitude);
  syn->add_option("--anomaly-s", sy.anomaly_s);
  syn->add_option("--motif", sy.motif)->check(CLI::IsMember({"block", "bar"}));
  syn->add_option("--pattern", sy.pattern)->check(CLI::IsMember({"constant", "gradient", "blob"}));
  syn->add_option("--prefix", sy.prefix);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bg) return cmd_estimate_bg(bg_f);
    if (*sig) return cmd_signal(sig_f, sig_d);
    if (*det) return cmd_detect(det_f, det_d, emit_signal);
    if (*tr) return cmd_train(tr_f, tr_t);
    if (*cl) return cmd_classify(cl_f, cl_model, cl_candidates);
    if (*ev) return cmd_evaluate(ev_f, ev_gt, ev_pred, ev_tol);
    if (*pl) return cmd_pipeline(pl_f, pl_d, pl_model, pl_gt);
    if (*syn) return cmd_synth(sy_f, sy);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
