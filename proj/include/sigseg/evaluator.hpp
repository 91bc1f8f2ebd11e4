#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sigseg {

struct ActivitySegment {
  std::string video_id;
  int class_id = 0;
  double start_s = 0.0;
  double end_s = 0.0;

  friend bool operator==(const ActivitySegment&, const ActivitySegment&) = default;
};

inline constexpr double kDefaultMatchTolerance = 10.0;

// Temporal intersection over union of two segments. Class and video are ignored.
double overlap(const ActivitySegment& g, const ActivitySegment& p);

// Same video, same class, and both endpoints within tol_s of the ground truth.
bool match_eligible(const ActivitySegment& g, const ActivitySegment& p,
                    double tol_s = kDefaultMatchTolerance);

struct Match {
  std::size_t gt = 0;
  std::size_t pred = 0;
  double os = 0.0;
};

// One-to-one greedy assignment over eligible pairs in descending overlap,
// ties broken by earlier gt start, earlier pred start, lower class id, then
// list position.
std::vector<Match> match_predictions(std::span<const ActivitySegment> gts,
                                     std::span<const ActivitySegment> preds,
                                     double tol_s = kDefaultMatchTolerance);

struct EvalRecord {
  ActivitySegment gt;
  std::optional<ActivitySegment> pred;
  double os = 0.0;
};

struct EvalReport {
  std::vector<EvalRecord> records;  // one per ground truth, in input order
  double average_score = 0.0;
  std::size_t unmatched_gt = 0;
  std::size_t unused_pred = 0;
};

// Mean overlap over all ground truths; unmatched ground truths score 0.
EvalReport average_score(std::span<const ActivitySegment> gts,
                         std::span<const ActivitySegment> preds,
                         double tol_s = kDefaultMatchTolerance);

// header: video_id,class,start_s,end_s
void write_segments_csv(std::span<const ActivitySegment> segments, const std::filesystem::path& path);
std::vector<ActivitySegment> read_segments_csv(const std::filesystem::path& path);

void write_report_json(const EvalReport& report, const std::filesystem::path& path);

}  // namespace sigseg
